"""Exact segmentation of one-dimensional signals with the Mumford-Shah, Blake-Zisserman and Potts family."""

__version__ = "0.1.0"
