from .endpoints import SERVICE, VERSION, router

__all__ = ["router", "SERVICE", "VERSION"]
