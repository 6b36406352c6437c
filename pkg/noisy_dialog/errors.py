"""
Иерархия исключений пакета.
"""


class NoisyDialogError(Exception):
    """Базовое исключение noisy_dialog."""


class ParameterError(NoisyDialogError, ValueError):
    """Недопустимые параметры запуска или несогласованные размеры."""


class InputTooLongError(NoisyDialogError, ValueError):
    """Вход хеш-функции длиннее t."""


class PayloadOverflowError(ParameterError):
    """Полезная нагрузка big hash не помещается в t₃."""


class IndexOutOfRangeError(NoisyDialogError, IndexError):
    """Индекс бита вне [0, ℓ) при расширении seed."""


class LengthMismatchError(NoisyDialogError, ValueError):
    """Длина сообщения или кодового слова не совпадает с EccConfig."""


class ScheduleDesyncError(NoisyDialogError, RuntimeError):
    """
    Стороны отправили в канал разные метки расписания.

    Это всегда ошибка реализации: расписание раундов не зависит от
    содержимого и не может быть сбито противником.
    """


class DagFormatError(NoisyDialogError, ValueError):
    """Битый файл DAG или нарушение инвариантов ProtocolDag."""
