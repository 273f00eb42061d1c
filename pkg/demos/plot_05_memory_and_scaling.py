"""
Memory and time at backbone scale
=================================

Storing a dense covariance for every feature map of a ResNet-34 costs
hundreds of GiB; two vectors per dimension cost a few MiB.  The timing sweep
runs with dense allocation disabled, so it also proves nothing quadratic ran.
"""
from lapcov.experiments import RESNET34_DIMS, bench, format_memory_report, growth_exponent, memory_report

print(format_memory_report(memory_report(RESNET34_DIMS)))
print()

rows = bench([1024, 4096, 16384, 65536])
for r in rows:
    print(f"C={r.dim:>6}: Frobenius {r.frobenius_seconds * 1e3:7.1f} ms   NLL {r.nll_seconds * 1e3:7.1f} ms")
dims = [r.dim for r in rows]
print("growth exponent, Frobenius:", round(growth_exponent(dims, [r.frobenius_seconds for r in rows]), 3))
print("growth exponent, NLL      :", round(growth_exponent(dims, [r.nll_seconds for r in rows]), 3))
