# rgd_app/ingest.py
"""
Ingesta de conjuntos de datos CSV para clasificación.

Lee el CSV (con cabecera), valida valores ausentes y no numéricos, separa
entrenamiento y prueba (aleatorio, o por número de ejemplos por clase) y
escala cada característica a [0, 1] con los mínimos y máximos del
entrenamiento. Las características constantes pasan a 0 y la prueba se
recorta a [0, 1].
"""

import os
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from rgd_app.errors import InvalidInputError
from rgd_app.logger_config import get_logger
from rgd_app.models import Dataset

logger = get_logger('ingest')


@dataclass
class IngestResult:
    train: pd.DataFrame
    test: pd.DataFrame
    label: str
    features: List[str]
    classes: List[str]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def _dataset(self, frame) -> Dataset:
        return Dataset(frame[self.features].to_numpy(dtype=float), frame[self.label].to_numpy(dtype=int),
                       self.n_classes)

    def train_dataset(self) -> Dataset:
        return self._dataset(self.train)

    def test_dataset(self) -> Dataset:
        return self._dataset(self.test)


def parse_class_counts(items) -> Dict[str, int]:
    """Convierte ['clase:n', ...] en {'clase': n}."""
    counts = {}
    for item in items or []:
        name, sep, value = str(item).rpartition(':')
        if not sep or not name:
            raise InvalidInputError(f"Formato de recuento por clase no válido: '{item}' (se espera clase:n)")
        try:
            counts[name] = int(value)
        except ValueError:
            raise InvalidInputError(f"Recuento no entero en '{item}'") from None
        if counts[name] < 0:
            raise InvalidInputError(f"Recuento negativo en '{item}'")
    return counts


def minmax_fit(frame: pd.DataFrame):
    """Mínimos y rangos por columna (rango 0 para columnas constantes)."""
    low = frame.min(axis=0)
    return low, frame.max(axis=0) - low


def minmax_apply(frame: pd.DataFrame, low, span, clip=False) -> pd.DataFrame:
    safe = span.where(span > 0, 1.0)
    scaled = (frame - low) / safe
    scaled.loc[:, span <= 0] = 0.0
    return scaled.clip(0.0, 1.0) if clip else scaled


def _validate(frame: pd.DataFrame, label: str, features: List[str]):
    missing_columns = [c for c in [label] + features if c not in frame.columns]
    if missing_columns:
        raise InvalidInputError(f"Columnas inexistentes en el CSV: {missing_columns}")

    absent = frame[[label] + features].isna().any(axis=1)
    if absent.any():
        # número de línea en el archivo (cabecera = línea 1)
        rows = [int(i) + 2 for i in np.flatnonzero(absent.to_numpy())]
        raise InvalidInputError(f"Valores ausentes en las filas {rows}")

    numeric = {}
    for column in features:
        converted = pd.to_numeric(frame[column], errors='coerce')
        if converted.isna().any():
            bad = [int(i) + 2 for i in np.flatnonzero(converted.isna().to_numpy())]
            raise InvalidInputError(f"La característica '{column}' tiene valores no numéricos en las filas {bad}")
        numeric[column] = converted.astype(float)
    return pd.DataFrame(numeric, index=frame.index)


def _encode_labels(values: pd.Series, classes: Optional[int]):
    if classes is not None:
        codes = pd.to_numeric(values, errors='coerce')
        if codes.isna().any() or (codes % 1 != 0).any() or codes.min() < 0 or codes.max() >= int(classes):
            raise InvalidInputError(f"Las etiquetas deben ser enteros en [0, {classes})")
        return codes.astype(int), [str(k) for k in range(int(classes))]
    uniques = sorted(values.unique().tolist())
    mapping = {value: index for index, value in enumerate(uniques)}
    return values.map(mapping).astype(int), [str(u) for u in uniques]


def _split(labels: pd.Series, classes: List[str], rng, test_fraction, test_per_class, train_per_class):
    index = labels.index.to_numpy()
    if not test_per_class and not train_per_class:
        if not 0.0 < float(test_fraction) < 1.0:
            raise InvalidInputError(f"test_fraction debe estar en (0, 1), recibido {test_fraction}")
        order = rng.permutation(index)
        n_test = int(round(len(order) * float(test_fraction)))
        return np.sort(order[n_test:]), np.sort(order[:n_test])

    unknown = set(test_per_class) | set(train_per_class)
    unknown -= set(classes)
    if unknown:
        raise InvalidInputError(f"Clases desconocidas en los recuentos: {sorted(unknown)}")

    train, test = [], []
    for code, name in enumerate(classes):
        members = rng.permutation(index[labels.to_numpy() == code])
        n_test = test_per_class.get(name, 0)
        if n_test > len(members):
            raise InvalidInputError(f"La clase '{name}' tiene {len(members)} ejemplos y se piden {n_test} de prueba")
        test.extend(members[:n_test])
        rest = members[n_test:]
        n_train = train_per_class.get(name, len(rest))
        if n_train > len(rest):
            raise InvalidInputError(f"La clase '{name}' no tiene {n_train} ejemplos restantes para entrenamiento")
        train.extend(rest[:n_train])
    return np.sort(np.asarray(train, dtype=int)), np.sort(np.asarray(test, dtype=int))


def ingest_csv(path, label, features=None, classes=None, test_per_class=None, train_per_class=None,
               test_fraction=0.2, seed=0) -> IngestResult:
    """
    Lee y prepara un CSV de clasificación.

    Args:
        path: Ruta al CSV con cabecera
        label: Columna de etiqueta
        features: Columnas de características (por defecto todas salvo la etiqueta)
        classes: Número de clases si las etiquetas ya son índices 0..C−1
        test_per_class: {clase: n} ejemplos de prueba por clase
        train_per_class: {clase: n} ejemplos de entrenamiento por clase (por defecto el resto)
        test_fraction: Fracción de prueba si no se dan recuentos por clase
        seed: Semilla del muestreo

    Returns:
        IngestResult: particiones normalizadas
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InvalidInputError(f"No se pudo leer '{path}': {exc}") from None

    features = list(features) if features else [c for c in frame.columns if c != label]
    if not features:
        raise InvalidInputError("No hay columnas de características")
    values = _validate(frame, label, features)
    labels, class_names = _encode_labels(frame[label], classes)

    rng = np.random.default_rng(int(seed))
    train_idx, test_idx = _split(labels, class_names, rng, test_fraction,
                                 dict(test_per_class or {}), dict(train_per_class or {}))
    if len(train_idx) == 0:
        raise InvalidInputError("La partición de entrenamiento está vacía")

    low, span = minmax_fit(values.loc[train_idx])
    train = minmax_apply(values.loc[train_idx], low, span)
    test = minmax_apply(values.loc[test_idx], low, span, clip=True)
    train.insert(0, label, labels.loc[train_idx].to_numpy())
    test.insert(0, label, labels.loc[test_idx].to_numpy())

    logger.info(f"Ingesta de {path}: {len(train)} filas de entrenamiento, {len(test)} de prueba, "
                f"{len(class_names)} clases")
    return IngestResult(train.reset_index(drop=True), test.reset_index(drop=True), label, features, class_names)


def write_split(result: IngestResult, out_dir) -> Dict[str, str]:
    """Escribe train.csv y test.csv en out_dir y devuelve sus rutas."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {'train': os.path.join(out_dir, 'train.csv'), 'test': os.path.join(out_dir, 'test.csv')}
    result.train.to_csv(paths['train'], index=False, float_format='%.17g', lineterminator='\n')
    result.test.to_csv(paths['test'], index=False, float_format='%.17g', lineterminator='\n')
    return paths
