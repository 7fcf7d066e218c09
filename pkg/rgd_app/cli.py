# rgd_app/cli.py
"""
Interfaz de línea de órdenes: run, ingest, mest, families y version.

Códigos de salida: 0 éxito, 1 ejecución abortada (resultados parciales
marcados), 2 configuración o datos de entrada no válidos.
"""

import json
import os
import re

import click
import numpy as np
import pandas as pd
from colorama import Fore, Style, init as colorama_init

from rgd_app import __version__, config_manager
from rgd_app.bench import load_experiment_config, run_experiment, with_overrides
from rgd_app.datagen import FAMILIES, family_table, get_family
from rgd_app.errors import InvalidConfigError, InvalidInputError
from rgd_app.ingest import ingest_csv, parse_class_counts, write_split
from rgd_app.logger_config import dump_run_log, get_logger, log_to_cmd, reset_run_log, setup_logging
from rgd_app.mest import RhoFunction, confidence_scale, locate, rescale
from rgd_app.robust_grad import default_robust_config, pivots_for

logger = get_logger('cli')

EXIT_OK = 0
EXIT_ABORTED = 1
EXIT_INVALID = 2

_RUN_DIR = re.compile(r'^run-(\d{3,})$')


def next_run_directory(base, experiment) -> str:
    """Crea <base>/<experimento>/run-NNN con el siguiente número libre."""
    parent = os.path.join(base, experiment)
    os.makedirs(parent, exist_ok=True)
    taken = [int(m.group(1)) for m in map(_RUN_DIR.match, os.listdir(parent)) if m]
    path = os.path.join(parent, f"run-{(max(taken) + 1 if taken else 1):03d}")
    os.makedirs(path)
    return path


def _write_frame(frame, path):
    frame.to_csv(path, index=False, float_format='%.17g', na_rep='nan', lineterminator='\n', encoding='utf-8')


@click.group()
@click.option('--config', 'config_file', type=click.Path(dir_okay=False), default=None,
              help='Archivo de configuración de la aplicación (por defecto config.json o RGD_CONFIG)')
@click.option('--log-level', default=None, help='Nivel de log (DEBUG, INFO, WARNING, ERROR, NONE)')
@click.pass_context
def cli(ctx, config_file, log_level):
    """Descenso de gradiente robusto: experimentos, ingesta y estimación M."""
    colorama_init()
    try:
        config = config_manager.load_config(config_file)
    except InvalidConfigError as e:
        click.echo(e.describe(config_file or config_manager.config_path()), err=True)
        ctx.exit(EXIT_INVALID)
    if log_level:
        config['logging'] = dict(config.get('logging', {}), log_level=log_level)
    setup_logging(config)
    ctx.obj = {'config': config}


@cli.command()
@click.argument('config_path', type=click.Path(dir_okay=False))
@click.option('--seed', type=int, default=None, help='Semilla base (sobrescribe la del archivo)')
@click.option('--output-dir', default=None, help='Directorio raíz de resultados')
@click.option('--methods', default=None, help='Lista de métodos separada por comas')
@click.option('--parallelism', type=int, default=None, help='Ensayos en paralelo')
@click.pass_context
def run(ctx, config_path, seed, output_dir, methods, parallelism):
    """Ejecuta el experimento descrito en CONFIG_PATH."""
    app_config = ctx.obj['config']
    try:
        config = load_experiment_config(config_path, app_config=app_config)
        config = with_overrides(
            config, seed=seed, parallelism=parallelism,
            methods=[m.strip() for m in methods.split(',') if m.strip()] if methods else None)
    except InvalidConfigError as e:
        logger.error(e.describe(config_path))
        click.echo(e.describe(config_path), err=True)
        ctx.exit(EXIT_INVALID)

    target = next_run_directory(output_dir or config.output_directory, config.name)
    reset_run_log()
    log_to_cmd(f"Ejecutando '{config.name}' en {target}", 'INFO', 'run')

    try:
        outcome = run_experiment(config)
    except InvalidConfigError as e:
        click.echo(e.describe(config_path), err=True)
        dump_run_log(os.path.join(target, 'run.log'))
        ctx.exit(EXIT_INVALID)
    except Exception as e:
        logger.error(f"Ejecución abortada: {str(e)}")
        dump_run_log(os.path.join(target, 'run.log'))
        click.echo(f"{Fore.RED}ERROR: {str(e)}{Style.RESET_ALL}", err=True)
        ctx.exit(EXIT_ABORTED)

    _write_frame(outcome.results, os.path.join(target, 'results.csv'))
    _write_frame(outcome.summary, os.path.join(target, 'summary.csv'))
    if outcome.top_settings is not None:
        _write_frame(outcome.top_settings, os.path.join(target, 'top_settings.csv'))

    lines = config.manifest_lines(__version__)
    lines += [f"completed_trials = {outcome.completed}", f"aborted_trials = {outcome.aborted}"]
    lines += [f"aborted_trial_{t.trial} = {t.message}" for t in outcome.trials if t.status != 'completed']
    with open(os.path.join(target, 'manifest.echo'), 'w', encoding='utf-8', newline='\n') as f:
        f.write('\n'.join(lines) + '\n')
    dump_run_log(os.path.join(target, 'run.log'))

    if outcome.aborted:
        click.echo(f"{Fore.YELLOW}{outcome.aborted} ensayos abortados; resultados parciales en {target}"
                   f"{Style.RESET_ALL}")
        ctx.exit(EXIT_ABORTED)
    click.echo(f"{Fore.GREEN}OK{Style.RESET_ALL} {outcome.completed} ensayos, {len(outcome.results)} filas -> {target}")


@cli.command()
@click.argument('csv_path', type=click.Path(dir_okay=False))
@click.option('--label', required=True, help='Columna de etiqueta')
@click.option('--features', default=None, help='Columnas de características separadas por comas')
@click.option('--classes', type=int, default=None, help='Número de clases si las etiquetas son 0..C-1')
@click.option('--test-per-class', multiple=True, help='Ejemplos de prueba por clase, clase:n (repetible)')
@click.option('--train-per-class', multiple=True, help='Ejemplos de entrenamiento por clase, clase:n (repetible)')
@click.option('--test-fraction', type=float, default=0.2, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--out', 'out_dir', required=True, help='Directorio de salida para train.csv y test.csv')
def ingest(csv_path, label, features, classes, test_per_class, train_per_class, test_fraction, seed, out_dir):
    """Normaliza y separa un CSV de clasificación."""
    try:
        result = ingest_csv(
            csv_path, label,
            features=[c.strip() for c in features.split(',')] if features else None,
            classes=classes,
            test_per_class=parse_class_counts(test_per_class),
            train_per_class=parse_class_counts(train_per_class),
            test_fraction=test_fraction, seed=seed)
    except InvalidInputError as e:
        click.echo(f"ERROR: {str(e)}", err=True)
        raise SystemExit(EXIT_INVALID)
    paths = write_split(result, out_dir)
    click.echo(f"train: {len(result.train)} filas -> {paths['train']}")
    click.echo(f"test: {len(result.test)} filas -> {paths['test']}")


@cli.command()
@click.argument('data_path', type=click.Path(dir_okay=False))
@click.option('--rho', default=None, help='Tipo de ρ (gudermannian, log_cosh, pseudo_huber, quadratic_test_only)')
@click.option('--delta', type=float, default=None, help='Confianza δ en (0, 1)')
@click.option('--scale', type=float, default=None, help='Escala s fija (omite el ajuste por σ̂)')
@click.pass_context
def mest(ctx, data_path, rho, delta, scale):
    """Estima θ̂, σ̂ y s de una columna de números y los imprime como JSON."""
    try:
        frame = pd.read_csv(data_path, header=None, comment='#')
        values = pd.to_numeric(frame.iloc[:, 0], errors='coerce').to_numpy(dtype=float)
        if values.size == 0 or np.isnan(values).any():
            raise InvalidInputError("El archivo debe contener una columna de números")
        overrides = {}
        if rho:
            overrides['rho'] = RhoFunction(rho)
        if delta is not None:
            overrides['delta'] = delta
        cfg = default_robust_config(ctx.obj['config'], **overrides)
        sigma = rescale(values, float(pivots_for(values[:, None], cfg)[0]), cfg.chi, cfg.fp)
        s = float(scale) if scale is not None else confidence_scale(sigma, values.size, cfg.delta)
        if not s > 0:
            raise InvalidInputError("La escala debe ser positiva")
        theta = locate(values, s, cfg.rho, cfg.fp)
    except (InvalidInputError, InvalidConfigError, OSError, pd.errors.ParserError,
            pd.errors.EmptyDataError) as e:
        click.echo(f"ERROR: {str(e)}", err=True)
        raise SystemExit(EXIT_INVALID)
    click.echo(json.dumps({'theta': theta, 'sigma': sigma, 'scale': s, 'n': int(values.size)}, sort_keys=True))


@cli.command()
@click.argument('names', nargs=-1)
def families(names):
    """Lista las familias de ruido y su escalera de 15 niveles."""
    try:
        selected = [get_family(name) for name in names] if names else list(FAMILIES.values())
    except InvalidConfigError as e:
        click.echo(f"ERROR: {e.message}", err=True)
        raise SystemExit(EXIT_INVALID)
    for family in selected:
        flag = (f"{Fore.GREEN}varianza finita" if family.finite_variance
                else f"{Fore.YELLOW}sin varianza finita (tabla de escalas)")
        click.echo(f"{Style.BRIGHT}{family.name}{Style.RESET_ALL} ({family.short}, scipy.stats.{family.dist}) "
                   f"{flag}{Style.RESET_ALL}")
        for level, sd, params in family_table(family.name):
            values = ', '.join(f"{k}={v:.6g}" for k, v in sorted(params.items()))
            click.echo(f"  nivel {level:2d}  sd={sd:7.4f}  {values}")


@cli.command()
def version():
    """Muestra la versión de la biblioteca."""
    click.echo(__version__)


def main():
    cli(prog_name='rgd')


if __name__ == '__main__':
    main()
