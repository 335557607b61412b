from . import metrics, bootstrap, audit, predictors, selection, report, evaluator, synthetic
