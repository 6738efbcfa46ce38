import logging
import os

import pandas as pd

from .run_statistics import RunStatistics

logger = logging.getLogger(__name__)

STATS_COLUMNS = ['episode', 'mean', 'stderr', 'moving_avg']
SWEEP_COLUMNS = ['alpha', 'mean', 'stderr']
FLOAT_FORMAT = '%.17g'


def _write(df: pd.DataFrame, path: str) -> None:
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        logger.error(f"CSV 파일 저장 중 오류 발생: {path}: {e}")
        raise OSError(f"CSV 파일을 저장할 수 없음: {path}: {e}") from e
    logger.info(f"CSV 파일 저장 완료: {path} ({len(df)}행)")


def stats_frame(stats: RunStatistics) -> pd.DataFrame:
    return pd.DataFrame({
        'episode': range(1, stats.episodes + 1),
        'mean': stats.mean,
        'stderr': stats.stderr,
        'moving_avg': stats.moving_average,
    }, columns=STATS_COLUMNS)


def emit_csv(stats: RunStatistics, path: str) -> None:
    """
    # Write episode,mean,stderr,moving_avg with one row per episode
    """
    _write(stats_frame(stats), path)


def emit_sweep_csv(sweep: pd.DataFrame, path: str) -> None:
    """
    # Write alpha,mean,stderr for an alpha sweep
    """
    _write(sweep[SWEEP_COLUMNS], path)


def read_csv(path: str) -> pd.DataFrame:
    """
    # Load a CSV written by emit_csv or emit_sweep_csv
    """
    if not os.path.exists(path):
        logger.error(f"CSV 파일을 찾을 수 없음: {path}")
        raise FileNotFoundError(f"CSV 파일을 찾을 수 없음: {path}")
    df = pd.read_csv(path)
    logger.info(f"CSV 파일 로드 완료: {path}")
    return df
