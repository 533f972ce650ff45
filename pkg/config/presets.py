"""Run presets for the five scenarios studied with the detector."""

# Fallback order for the "auto" correlator strategy
PROVIDER_ORDER = {
    "xy": ["ff", "ed"],
    "xxz": ["ed"],
}

# Observable names accepted by scans and detection
OBSERVABLES = [
    "Fbar_psi", "Fbar_phi", "Fmax",
    "Dbar_psi", "Dbar_phi", "Dmin",
    "z", "xx", "yy", "zz",
]

# Peak direction of a window: "abs" takes the largest magnitude, "auto" picks
# per observable at order 0 and "abs" otherwise
EXTREMUM_SENSES = ("auto", "abs", "max", "min")

# The observable's own extremum at an anisotropy transition
PEAK_SENSES = {
    "Dmin": "max", "Dbar_psi": "max", "Dbar_phi": "max",
    "Fmax": "min", "Fbar_psi": "min", "Fbar_phi": "min",
}

# Each window entry: (start, stop, derivative order, expected QCP); order 0 is the observable itself
MODEL_PRESETS = {
    "xxz-h12": {
        "model": "xxz",
        "params": {"h": 12.0, "delta": 1.0},
        "axis": "delta",
        "range": (1.0, 6.0),
        "kts": [0.1, 0.2, 0.3, 0.4, 0.5],
        "provider": "ed:12",
        "windows": [(1.5, 2.5, 1, 2.0), (4.0, 5.5, 2, 4.875)],
        "fit_kinds": {1: "quadratic", 2: "linear"},
    },
    "xy-gamma0": {
        "model": "xy",
        "params": {"lambda": 1.0, "gamma": 0.0},
        "axis": "lambda",
        "range": (0.1, 2.0),
        "kts": [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10],
        "provider": "ff",
        "windows": [(0.7, 1.3, 1, 1.0)],
        "fit_kinds": {1: "linear"},
    },
    "xy-gamma0.5": {
        "model": "xy",
        "params": {"lambda": 1.0, "gamma": 0.5},
        "axis": "lambda",
        "range": (0.1, 2.0),
        "kts": [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10],
        "provider": "ff",
        "windows": [(0.88, 1.12, 2, 1.0)],
        "fit_kinds": {2: "linear"},
    },
    "xy-gamma1": {
        "model": "xy",
        "params": {"lambda": 1.0, "gamma": 1.0},
        "axis": "lambda",
        "range": (0.1, 2.0),
        "kts": [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10],
        "provider": "ff",
        "windows": [(0.7, 1.3, 2, 1.0)],
        "fit_kinds": {2: "linear"},
    },
    "xy-lambda1.5": {
        "model": "xy",
        "params": {"lambda": 1.5, "gamma": 0.0},
        "axis": "gamma",
        "range": (-1.0, 1.0),
        "kts": [0.05, 0.1, 0.2],
        "provider": "ff",
        "observables": ["Dmin", "Fmax"],
        "windows": [(-0.5, 0.5, 0, 0.0)],
        "fit_kinds": {0: "linear"},
    },
}

DETECTION_DEFAULTS = {
    "observables": ["Dmin"],
    "min_temperatures": 3,
    "fit_kind": "linear",
}
