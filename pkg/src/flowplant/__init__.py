"""Desk-scale IIoT platform kernel and quality-inspection demo application."""

__version__ = "0.1.0"
