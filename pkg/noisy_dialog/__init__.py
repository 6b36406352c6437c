"""
noisy_dialog — симулятор помехоустойчивого интерактивного кодирования.

Пакет превращает произвольный двусторонний протокол (DAG-игру с фишкой) в
протокол, устойчивый к адаптивному противнику, который портит долю ε
переданных битов, и прогоняет обе стороны против побитового канала.
"""

__version__ = "0.1.0"
