"""Federated learning as composed m-ary functionalities, with exact privacy checks."""

__version__ = "0.1.0"
