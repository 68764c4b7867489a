from .covertime_py import Tree

__all__ = ["Tree"]
