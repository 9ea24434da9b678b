"""
The propen library.

This library implements property-guided design enhancement with matched datasets (PropEn),
an explicit-guidance baseline, toy and airfoil design datasets, evaluation metrics, and
numerical checks of the method's theoretical guarantees.
"""

__version__ = "0.1.0"
