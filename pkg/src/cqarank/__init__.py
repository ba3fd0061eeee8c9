"""Feature-rich SVM ranking for community question answering forums."""

__version__ = "0.1.0"
