"""Logging utilities for consistent logging across the project."""
import inspect
import logging
import time
from functools import wraps
from typing import Any, Callable

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# run parameters worth echoing when a scan or classification starts
CONTEXT_PARAMETERS = ("n", "count", "seed", "h", "steps", "l_max", "search_trials", "threads")


def run_context(func: Callable, args: tuple, kwargs: dict) -> str:
    """Render the scalar run parameters of a call, e.g. "n=7, seed=0"."""
    try:
        bound = inspect.signature(func).bind(*args, **kwargs)
    except TypeError:
        return ""
    bound.apply_defaults()
    return ", ".join(
        f"{name}={bound.arguments[name]}"
        for name in CONTEXT_PARAMETERS
        if bound.arguments.get(name) is not None
    )


def outcome(result: Any) -> str:
    """Short description of a result: its verdict, or a row count for lists."""
    verdict = getattr(result, "verdict", None)
    if verdict is not None:
        return f"verdict {verdict}"
    if isinstance(result, list):
        return f"{len(result)} rows"
    return "done"


def log_operation(logger: logging.Logger):
    """Decorator logging start (with run parameters), outcome and elapsed time."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            operation = func.__name__.replace("_", " ").title()
            context = run_context(func, args, kwargs)
            logger.info("Starting %s%s", operation, f" ({context})" if context else "")
            started = time.perf_counter()

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error("Error in %s after %.3fs: %s", operation, time.perf_counter() - started, e)
                raise

            logger.info("Completed %s in %.3fs: %s", operation, time.perf_counter() - started, outcome(result))
            return result

        return wrapper

    return decorator


def setup_logging(name: str = "src", level: int | str = logging.INFO) -> logging.Logger:
    """Attach one stderr handler to the package logger; stdout carries reports only."""
    logger = logging.getLogger(name)

    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    logger.setLevel(level.upper() if isinstance(level, str) else level)
    return logger
