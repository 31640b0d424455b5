"""Universal hash families, combinatorial designs and privacy amplification."""
