"""HTTP layer: FastAPI app and its request/response models."""
