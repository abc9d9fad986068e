"""Frozen oracle values; regenerate with tests/oracles/derived_values.py."""
BOSE_5p2GHZ_30MK = 0.0002439751838659107
LOWFREQ_EXACT_FIG2_N1E_6 = 16.78209630009095
LOWFREQ_EXACT_FIGS1_N0p1 = 1634116.0330572883
CORRELATOR_ODE_FIG2_N1E_3 = {4e-08: (0.0007944581102333132, -0.00046730718198662475, 5833.362476758862), 1e-07: (0.0006721237600483389, -0.0004735148713352411, 12344.427793859053), 5e-07: (0.0006744272653977768, -0.0004685884431789232, 15903.7992051837)}
DETUNED_F = 96.76083772265982
DETUNED_ODE_FIG2_DELTA_CHI = {500000.0: 11854.0560739967, 1000000.0: 11371.6037821473, 2000000.0: 10405.069325618633, 5000000.0: 7781.81617629336}
DETUNED_LINDBLAD_FIG2_DELTA_CHI = {500000.0: 11854.056073990734, 1000000.0: 11371.603672308998, 2000000.0: 10406.009264055343, 5000000.0: 7788.174000110144}
COHERENT_LINDBLAD_TAU1NS_1MHZ_N1E_3 = 30898.99388550605
MODERATE_LINDBLAD_FIGS1_N0p1 = {200000.0: 1618635.174764677, 1000000.0: 1556711.7415942198, 3000000.0: 1401947.4615731884}
MC_RATE_FIG2_DT100NS_N1E_3 = (12347.330865514232, 17.753266022033305)
MC_CORRELATOR_FIG2_DT100NS_N1E_3 = {'s_over_dt': [0.0, 0.25, 0.5, 0.75, 1.0], 're': [0.0006758372163148488, 0.0008860272748279208, 0.0007466233934092474, 0.000684646185970724, 0.0006714287269418725], 'im': [0.00047517541842730674, -0.00030985430085783087, -0.0004867064357188693, -0.00048749750093450854, -0.00047452389802604716], 'se': [3.1691347725412843e-06, 3.1964774085897594e-06, 3.1541340631742825e-06, 3.163409727823119e-06, 3.1642098350903745e-06]}
