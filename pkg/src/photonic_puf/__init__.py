"""Cell-based photonic PUF simulator: Jones-calculus model, CRP dataset
generation, quality metrics, and ML-attack susceptibility."""

__version__ = "0.1.0"
