# Test package for entropy-clustering
