"""
Symmetry-enhanced deraining: p4 group convolutions with a numpy autograd engine,
DSEN / S-DSEN models, training, synthetic rain data and quality metrics.
"""

__version__ = "1.0.0"
