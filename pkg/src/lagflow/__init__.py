"""Lagrangian mean curvature flow of planar curves: flow, oracles and estimate audits."""

__version__ = "0.1.0"
