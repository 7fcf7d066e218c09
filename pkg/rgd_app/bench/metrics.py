# rgd_app/bench/metrics.py
"""
Métricas de evaluación y agregación de resultados por ensayo.
"""

import numpy as np
import pandas as pd

from rgd_app.errors import InvalidInputError
from rgd_app.models import Dataset

RESULT_COLUMNS = ['experiment', 'condition', 'method', 'trial', 'iteration', 'metric', 'value']
GROUP_COLUMNS = ['experiment', 'condition', 'method', 'iteration', 'metric']


def rmse(w, test: Dataset) -> float:
    """(m⁻¹·Σ(wᵀx_i − y_i)²)^{1/2} sobre el conjunto de prueba."""
    if test.n < 1:
        raise InvalidInputError("El conjunto de prueba está vacío")
    residuals = test.inputs @ np.asarray(w, dtype=float) - test.targets
    return float(np.sqrt(np.mean(residuals ** 2)))


def excess_rmse(w_hat, w_star, test: Dataset) -> float:
    """Error de predicción normalizado e(ŵ) − e(w*)."""
    return rmse(w_hat, test) - rmse(w_star, test)


def results_frame(rows) -> pd.DataFrame:
    """Tabla larga con columnas fijas y orden determinista."""
    frame = pd.DataFrame(list(rows), columns=RESULT_COLUMNS)
    frame['trial'] = frame['trial'].astype(int)
    frame['iteration'] = frame['iteration'].astype(int)
    frame['value'] = frame['value'].astype(float)
    return frame


def aggregate(results: pd.DataFrame) -> pd.DataFrame:
    """
    Media, varianza entre ensayos y número de ensayos por
    (experimento, condición, método, iteración, métrica).

    La varianza es poblacional (ddof=0), así un único ensayo da varianza 0.
    El resultado no depende del orden de las filas.

    Args:
        results: Tabla larga con RESULT_COLUMNS

    Returns:
        pd.DataFrame: Columnas GROUP_COLUMNS + mean, variance, trials
    """
    if results.empty:
        return pd.DataFrame(columns=GROUP_COLUMNS + ['mean', 'variance', 'trials'])
    ordered = results.sort_values(['trial'] + GROUP_COLUMNS, kind='mergesort')
    grouped = ordered.groupby(GROUP_COLUMNS, sort=True)['value']
    summary = grouped.agg(mean='mean', variance=lambda v: float(np.var(v.to_numpy(), ddof=0)),
                          trials='count').reset_index()
    summary['trials'] = summary['trials'].astype(int)
    return summary


def select_top_settings(summary: pd.DataFrame, k=2, metric='test_error', last=5) -> pd.DataFrame:
    """
    Ordena las configuraciones (condiciones) de cada método por la mediana de
    los últimos `last` puntos de control del error medio y conserva las k mejores.

    Args:
        summary: Salida de aggregate
        k: Número de configuraciones por método
        metric: Métrica a ordenar
        last: Puntos de control finales considerados

    Returns:
        pd.DataFrame: method, condition, score, rank
    """
    columns = ['method', 'condition', 'score', 'rank']
    rows = summary[(summary['metric'] == metric) & (summary['iteration'] >= 0)]
    if rows.empty:
        return pd.DataFrame(columns=columns)
    scored = []
    for (method, condition), group in rows.groupby(['method', 'condition'], sort=True):
        tail = group.sort_values('iteration')['mean'].to_numpy()[-int(last):]
        scored.append((method, condition, float(np.median(tail))))
    frame = pd.DataFrame(scored, columns=['method', 'condition', 'score'])
    frame = frame.sort_values(['method', 'score', 'condition'], kind='mergesort')
    frame['rank'] = frame.groupby('method').cumcount() + 1
    return frame[frame['rank'] <= int(k)].reset_index(drop=True)[columns]
