import inspect
import json
import logging
import time
import traceback
from functools import wraps
from typing import Any, Callable, Optional

from pydantic import BaseModel

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """Install console (and optional file) handlers on the root logger."""
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode='a'))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LOG_FORMAT, handlers=handlers, force=True)


def log_lab_operation(level: int = logging.DEBUG) -> Callable:
    """Decorator to log a lab operation's parameters, timing and result."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            func_name = func.__name__
            start_time = time.time()
            try:
                sig = inspect.signature(func)
                bound_args = sig.bind_partial(*args, **kwargs)
                log_params = {k: _preview(v) for k, v in bound_args.arguments.items()}
                logger.log(level, f"🛠️ RUNNING: {func_name}")
                logger.debug(f"   PARAMS: {json.dumps(log_params, default=str)}")
            except Exception as log_err:
                logger.warning(f"⚠️ Param log error for {func_name}: {log_err}")

            try:
                result = func(*args, **kwargs)
            except Exception as e:
                exec_time = time.time() - start_time
                logger.error(f"❌ FAILED: {func_name} ({exec_time:.2f}s)")
                logger.error(f"   ERROR: {type(e).__name__} - {e}")
                logger.debug(traceback.format_exc())
                raise
            exec_time = time.time() - start_time
            res_prev, res_detail = _format_result_for_logging(result)
            logger.log(level, f"✅ DONE: {func_name} ({exec_time:.2f}s)")
            logger.debug(f"   RESULT PREVIEW: {res_prev}")
            return result

        return wrapper

    return decorator


def _preview(value: Any) -> Any:
    if isinstance(value, BaseModel):
        try:
            dumped = value.model_dump(exclude_defaults=True, exclude_none=True)
            dumped_json = json.dumps(dumped, default=str)
            return dumped if len(dumped_json) <= 150 else f"{type(value).__name__}[{len(dumped)} keys]"
        except Exception:
            return type(value).__name__
    if isinstance(value, (list, tuple)) and len(value) > 5:
        return f"[{', '.join(repr(v)[:30] for v in value[:5])}... ({len(value)} items)]"
    if hasattr(value, "shape"):
        return f"array{tuple(value.shape)}"
    if callable(value):
        return getattr(value, "__name__", type(value).__name__)
    return repr(value)[:100]


def _format_result_for_logging(result: Any) -> tuple[str, Any]:
    """Helper to format operation results for logging."""
    res_prev, res_detail = repr(result), result
    try:
        if isinstance(result, BaseModel):
            json_prev = result.model_dump_json(exclude_defaults=True, exclude_none=True)
            res_detail = result.model_dump(exclude_defaults=True, exclude_none=True)
            res_prev = f"{type(result).__name__}[{len(json_prev)} chars]" if len(json_prev) > 300 else json_prev
        elif isinstance(result, list) and len(result) > 10:
            res_prev = f"List[{len(result)} items]"
        elif isinstance(result, tuple):
            res_prev = repr(result)[:200]
    except Exception as fmt_err:
        logger.warning(f"Result format error: {fmt_err}")
        res_prev = f"{type(result).__name__}(FormatErr)"

    if not isinstance(res_detail, (str, int, float, bool, list, dict, type(None))):
        res_detail = repr(res_detail)

    return str(res_prev), res_detail
