import os

# Threaded OpenBLAS spin-waits pathologically on low-CPU containers; pin the
# pools before numpy loads so dense kernels run single-threaded and test
# timings stay deterministic.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

try:
    import threadpoolctl

    threadpoolctl.threadpool_limits(1)
except ImportError:  # pragma: no cover - env fallback above still applies
    pass
