import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

from noisy_dialog.config import Settings

_HANDLER_TAG = "_noisy_dialog_handler"


def setup_logging(settings: Settings) -> None:
    """
    Настройка логгера на основе pydantic-модели Settings.logging.

    Повторный вызов заменяет ранее установленные обработчики, а не
    добавляет новые (CLI и тесты могут вызывать его несколько раз).
    """
    log_cfg = settings.logging

    console_level = logging.getLevelName(log_cfg.console.level.upper())
    file_level = logging.getLevelName(log_cfg.file.level.upper())

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root.removeHandler(handler)
            handler.close()
    root.setLevel(min(console_level, file_level))

    # консоль
    ch = logging.StreamHandler()
    ch.setLevel(console_level)
    ch.setFormatter(logging.Formatter(log_cfg.console.fmt, datefmt=log_cfg.date_format))
    setattr(ch, _HANDLER_TAG, True)
    root.addHandler(ch)

    # файл с ротацией
    Path(log_cfg.file.path).parent.mkdir(parents=True, exist_ok=True)
    fh = RotatingFileHandler(
        filename=log_cfg.file.path,
        maxBytes=log_cfg.file.max_bytes,
        backupCount=log_cfg.file.backup_count,
        encoding="utf-8",
    )
    fh.setLevel(file_level)
    fh.setFormatter(logging.Formatter(log_cfg.file.fmt, datefmt=log_cfg.date_format))
    setattr(fh, _HANDLER_TAG, True)
    root.addHandler(fh)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
