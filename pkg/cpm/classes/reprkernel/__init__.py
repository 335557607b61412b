from . import attention, decompose, fusion, encoder
