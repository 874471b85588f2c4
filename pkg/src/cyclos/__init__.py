"""cyclos: cycle-closure toolkit for chain complexes, barcodes, spike
coincidence graphs, delay networks, and order-invariance audits."""

__version__ = "0.1.0"
