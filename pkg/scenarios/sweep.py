"""
Parameter sweeps over scenario settings
Supports grid search and parallel execution
"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from itertools import product
from typing import Any, Dict, List, Sequence, Tuple

import pandas as pd
from tqdm import tqdm

from scenarios.config import ConfigError, ScenarioConfig, SCHEMA, parse_value, apply_overrides
from scenarios.runner import run_scenario

logger = logging.getLogger(__name__)


def parse_grid_spec(spec: str) -> Tuple[str, List[Any]]:
    """
    Parse ``section.key=v1,v2,...`` into a key and its value list.

    Raises:
        ConfigError: For malformed specs or unknown keys
    """
    if "=" not in spec:
        raise ConfigError(f"sweep axis {spec!r} is not of the form section.key=v1,v2,...")
    key, raw = (part.strip() for part in spec.split("=", 1))
    section, _, name = key.partition(".")
    if section not in SCHEMA or name not in SCHEMA[section]:
        raise ConfigError("unknown sweep key", key)
    values = [parse_value(v.strip()) for v in raw.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep axis has no values", key)
    return key, values


def evaluate(config: ScenarioConfig, overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Run one grid point and return its trace metrics."""
    point = apply_overrides(config, [f"{k}={_format(v)}" for k, v in overrides.items()])
    result = run_scenario(point, workers=1, show_progress=False)
    metrics = dict(result.metrics)
    metrics["cutoff"] = result.cutoff
    return metrics


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{value}"'
    return repr(value)


class ParameterSweep:
    """
    Evaluate trace metrics over a Cartesian grid of config overrides.
    """

    def __init__(self, config: ScenarioConfig, metric: str = "min_value"):
        """
        Initialize sweep.

        Args:
            config: Base scenario
            metric: Metric used to rank grid points (descending)
        """
        self.config = config
        self.metric = metric
        self.results = pd.DataFrame()

    def grid_search(
        self,
        param_grid: Dict[str, Sequence[Any]],
        n_jobs: int = 1,
        show_progress: bool = True
    ) -> pd.DataFrame:
        """
        Run every parameter combination.

        Args:
            param_grid: Dotted config keys to lists of values
            n_jobs: Number of parallel jobs (1 = sequential)
            show_progress: Show progress bar

        Returns:
            DataFrame with one row per combination, ranked by ``metric``
        """
        names = list(param_grid.keys())
        combinations = list(product(*param_grid.values()))
        logger.info(f"Sweeping {len(combinations)} parameter combinations over {', '.join(names)}")

        results = []

        if n_jobs == 1:
            iterator = tqdm(combinations, desc="Sweep") if show_progress else combinations
            for combo in iterator:
                params = dict(zip(names, combo))
                try:
                    result = evaluate(self.config, params)
                    result.update(params)
                    results.append(result)
                except Exception as e:
                    logger.error(f"Error with params {params}: {e}")
                    continue
        else:
            with ProcessPoolExecutor(max_workers=n_jobs) as executor:
                futures = {
                    executor.submit(evaluate, self.config, dict(zip(names, combo))): combo
                    for combo in combinations
                }

                iterator = tqdm(as_completed(futures), total=len(futures), desc="Sweep") if show_progress else as_completed(futures)
                for future in iterator:
                    params = dict(zip(names, futures[future]))
                    try:
                        result = future.result()
                        result.update(params)
                        results.append(result)
                    except Exception as e:
                        logger.error(f"Error with params {params}: {e}")
                        continue

        results_df = pd.DataFrame(results)
        if self.metric in results_df.columns:
            results_df = results_df.sort_values(self.metric, ascending=False).reset_index(drop=True)

        self.results = results_df
        return results_df

    def get_best_params(self) -> Dict[str, Any]:
        """Best parameter combination by the ranking metric."""
        if len(self.results) == 0:
            return {}
        best_row = self.results.iloc[0]
        return {col: best_row[col] for col in self.results.columns if "." in col}

    def get_top_n(self, n: int = 10) -> pd.DataFrame:
        return self.results.head(n)
