from . import voting, fusion, baselines, recommendation, queries
