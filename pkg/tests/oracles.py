"""Reference values computed independently with mpmath at 30 digits and frozen here.

Recompute with ``python3 tests/oracles.py`` (needs mpmath); the printed values
must match the constants below.
"""

ZETA_2 = 1.64493406684822643647241516665
ZETA_PRIME_2 = -0.937548254315843753702574094568
ZETA_M4_30I = complex(-1140.18003401171896247233061854, 44.1756214611568073726273052972)
ZETA_PRIME_HALF_20I = complex(0.7145067908437759923766753826, 1.00524088394701315547272407661)
ZETA_SECOND_3_4I = complex(-0.035103336078903482008654691897, 0.0144002205327047425062329349837)
ZETA_3_I = complex(1.10721440843140919562510020578, -0.148290867178175348490764125669)
ETA_3 = 0.901542677369695714049803621134
ZETA_4_M2I = complex(0.997932595230035763306087942953, 0.0714610164240930863129235534645)

# L(s, chi) mod 5; index 2 is the real character (Legendre symbol), index 1 has chi(2) = i
L5_2_AT_2 = 0.706211403259740969931003175763
L5_2_HALF_10I = complex(0.0700622754898766549129240431471, 0.25541118768749353716404978985)
L5_2_3_I = complex(0.890016548325320176911308164915, 0.0961866858429792288856060034921)
L5_2_4_M2I = complex(0.991810065919212636190894848021, -0.0700284352116193681199367260694)
L5_1_HALF_10I = complex(2.12499682345079631981498861099, 2.16385918537042052968181079854)

# ordinates of the nontrivial zeros of zeta below t = 60
ZETA_ZERO_ORDINATES = [
    14.134725141734693, 21.022039638771555, 25.010857580145688, 30.424876125859513,
    32.935061587739189, 37.586178158825671, 40.918719012147495, 43.327073280914999,
    48.005150881167159, 49.773832477672302, 52.970321477714460, 56.446247697063394,
    59.347044002602353,
]

# the two lowest nontrivial zeros of zeta'
ZETA_PRIME_ZERO_1 = complex(2.46316186945432128587439505331, 23.2983204927628579020109616266)
ZETA_PRIME_ZERO_2 = complex(1.28649682226904769704411427839, 31.7082500831159086049543521423)

# Davenport-Heilbronn combination: weight and an off-line zero pair
DH_XI = 0.284079043840412296028291832393
DH_ZERO = complex(0.808517182456637385553351960607, 85.6993484853775921719292677089)
DH_PARTNER = complex(0.191482817543362614446648039393, 85.6993484853775921719292677089)
DH_AT_2 = 1.00006833780978269646999222003


def _recompute():
    import mpmath as mp

    mp.mp.dps = 30
    legendre = [0, 1, -1, -1, 1]
    xi = (mp.sqrt(10 - 2 * mp.sqrt(5)) - 2) / (mp.sqrt(5) - 1)

    def dh(s):
        return 5 ** (-s) * (mp.zeta(s, mp.mpf(1) / 5) + xi * mp.zeta(s, mp.mpf(2) / 5)
                            - xi * mp.zeta(s, mp.mpf(3) / 5) - mp.zeta(s, mp.mpf(4) / 5))

    print("ZETA_2", mp.zeta(2))
    print("ZETA_PRIME_2", mp.zeta(2, derivative=1))
    print("ZETA_M4_30I", mp.zeta(mp.mpc(-4, 30)))
    print("L5_2_AT_2", mp.dirichlet(2, legendre))
    print("ZETA_PRIME_ZERO_1", mp.findroot(lambda s: mp.zeta(s, derivative=1), mp.mpc(2.46, 23.3)))
    print("DH_ZERO", mp.findroot(dh, mp.mpc(0.8085, 85.6993)))
    print("ZETA_ZERO_ORDINATES", [float(mp.zetazero(n).imag) for n in range(1, 14)])


if __name__ == "__main__":
    _recompute()
