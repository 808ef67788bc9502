from hypothesis import HealthCheck, settings

# Numba compilation on first kernel use can make an individual example look
# slow; wall-clock deadlines are meaningless for these tests.
settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")
