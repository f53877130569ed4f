"""BasConv: basket-aware graph convolution for within-basket recommendation."""
__version__ = '0.1.0'
