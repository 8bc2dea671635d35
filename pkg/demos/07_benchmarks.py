"""The benchmark kernels at toy sizes.

The same sweeps are available from the command line:

    bench --bench pi --size 10000000 --threads 1,2,4 --repeats 10 --out pi.csv

Every timed run is validated against a sequential oracle before its row is
written; timings are reported, never asserted.
"""

import math

from ompcore.bench import (
    BenchConfig,
    generate_system,
    generate_text,
    run_fib,
    run_jacobi,
    run_pi,
    run_quad,
    run_wordcount,
    sweep,
)
import numpy as np

print("pi(10^6):       ", run_pi(10**6, threads=2),
      f"(error {abs(run_pi(10**6) - math.pi):.2e})")

print("quad(10^6):     ", run_quad(10**6, threads=2),
      f"(analytic {math.atan(500.0) / math.pi:.7f})")

result = run_jacobi(96, tol=1e-7, threads=2)
a, b = generate_system(96)
residual = float(np.max(np.abs(a @ result.x - b)))
print(f"jacobi(96):      {result.iterations} iterations, "
      f"residual {residual:.2e}")

print("fib(18):        ", run_fib(18, threads=2))

text = generate_text(20_000, seed=1)
counts = run_wordcount(text, threads=2)
print(f"wordcount:       {sum(counts.values())} words, "
      f"{len(counts)} distinct")

print("\na tiny sweep (CSV on stdout):")
sweep(BenchConfig(bench="pi", size=100_000, threads=[1, 2], repeats=2))
