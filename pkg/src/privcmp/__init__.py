"""Three-party private comparison with a semi-honest comparator."""
