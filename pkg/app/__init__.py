# Evidential-state engine for discrete causal inference
