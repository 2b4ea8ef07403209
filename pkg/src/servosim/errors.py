class ValidationError(ValueError):
    """Input violates a documented precondition, invariant, or file schema."""
