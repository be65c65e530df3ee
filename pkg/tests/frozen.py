"""Frozen outputs of the independent oracles in tests/oracles.

Regenerate with ``python tests/oracles/hankel.py`` and
``python tests/oracles/fd_eigen.py``; tests/test_oracles.py re-runs both.
"""

# (x, f_z(x), f_z'(x)) for the exponential field p = 1, q = e^{2x}, x0 = 0
HANKEL_JOST = {
    (1+0j): [
        (0.0, (0.7501839836502319-0.4071332463701013j), (0.3387760277701143+1.149148788577072j)),
        (0.5, (0.6850172702734698+0.22249986659059606j), (-0.690114119709655+1.2356618397290902j)),
        (1.0, (0.040391807712008246+0.584384905681616j), (-1.7208558264820524-0.13968599500676177j)),
        (1.5, (-0.4560026926296348-0.09444474839179016j), (0.6514820604933772-2.058038156097389j)),
        (2.0, (0.36576369006674164+0.008107622577752544j), (-0.23954937058787545+2.7286957432336103j)),
        (2.5, (0.038713099375268394-0.2832773890085739j), (3.446190058464302+0.6140629036308748j)),
        (3.0, (0.21829383060317498+0.04536738913112694j), (-1.0214460348378829+4.368697262886332j)),
        (4.0, (-0.1331437727587549-0.024177213761672672j), (1.386851750215217-7.258843344708709j)),
        (5.0, (-0.07961450586520669+0.019982149211877524j), (-2.925893038125239-11.826166079938698j)),
        (6.5, (-0.011686251309424472-0.036971186069760624j), (24.596952926987196-7.754537720246597j)),
    ],
    1j: [
        (0.0, (1.3799928138705593-0.33357983597169144j), (-0.5761887712226037+1.9675201515962095j)),
        (0.5, (0.8691453962840308+0.4905163729956402j), (-1.4843335824012103+1.235269738868776j)),
        (1.0, (-0.05316623919402894+0.7137534706108515j), (-1.9712687053940767-0.6076123258936464j)),
        (1.5, (-0.5014883982740616-0.15565093134341298j), (1.0050526111209916-2.178781638599265j)),
        (2.0, (0.39152839092603436+0.03319189449658589j), (-0.4667343164901871+2.884249458707826j)),
        (2.5, (0.051945306964046145-0.2937815984814119j), (3.5549241660030866+0.7920978956346892j)),
        (3.0, (0.22273310474063887+0.05195029349185535j), (-1.1606562278910402+4.448124761676656j)),
        (4.0, (-0.1341528211144396-0.025619694324031314j), (1.4671495133384866-7.311782143056139j)),
        (5.0, (-0.07995094445621367+0.019781483361861227j), (-2.8956051955956292-11.875798658804717j)),
        (6.5, (-0.01166725076888393-0.03700778369035109j), (24.621267068394182-7.741844734598849j)),
    ],
}

# power_law(0, 4), alpha = 0, omega = 1: Richardson-extrapolated FD eigenvalues in [0, 50]
FD_EIGENVALUES_P04_OMEGA1 = [
    0.13824094583590826,
    2.9800382579366365,
    8.172243538002173,
    14.33415582527717,
    21.27322005977233,
    28.840634785592556,
    36.94585949430863,
    45.52529142051935,
]
