"""Published mean AP per (model, group) and the relative-MAP table derived from them."""

MODELS = ("HomoDynamic", "HomoStatic", "LinearDynamic", "LinearStatic", "QuadraticDynamic", "QuadraticStatic")
GROUPS = ("G1", "G2", "G3", "G4")

MEAN_AP = {
    "HomoDynamic": (0.274416, 0.451901, 0.540694, 0.560771),
    "HomoStatic": (0.332728, 0.511768, 0.578589, 0.599116),
    "LinearDynamic": (0.202763, 0.380657, 0.497483, 0.540127),
    "LinearStatic": (0.390334, 0.566920, 0.598028, 0.623278),
    "QuadraticDynamic": (0.135732, 0.279384, 0.440209, 0.517028),
    "QuadraticStatic": (0.354866, 0.548226, 0.589859, 0.622054),
    "NaiveStatic": (0.022027, 0.062533, 0.141468, 0.203014),
}

RELATIVE_MAP = {
    "HomoDynamic": (11.458411, 6.226555, 2.822037, 1.762236),
    "HomoStatic": (14.105765, 7.183912, 3.089905, 1.951114),
    "LinearDynamic": (8.205382, 5.087254, 2.516586, 1.660544),
    "LinearStatic": (16.721054, 8.065881, 3.227313, 2.070128),
    "QuadraticDynamic": (5.162206, 3.467756, 2.111730, 1.546766),
    "QuadraticStatic": (15.110806, 7.766931, 3.169568, 2.064102),
}


def mean_ap_cells():
    return {(m, g): v for m, row in MEAN_AP.items() for g, v in zip(GROUPS, row)}
