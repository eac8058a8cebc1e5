"""Trigonometrically approximated maximum likelihood for stable laws and stable OU processes."""
