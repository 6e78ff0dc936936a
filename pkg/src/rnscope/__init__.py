"""RNS-CKKS polynomial arithmetic engine with an analytical GPU
memory-hierarchy cost model and a verification harness."""

__version__ = "0.1.0"
