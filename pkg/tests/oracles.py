"""Reference values frozen from 40-digit mpmath evaluations.

log-gamma: mpmath.loggamma.  D_b: p b 2F1(1-b, 1-delta; 2; p) in mpmath.
Cellular moments: 1/2F1(b, -delta; 1-delta; -theta) in mpmath, and for
activity p a direct mpmath.quad of the relative-distance integral.
"""

LOGGAMMA_3_4I = (-1.7566267846037842+4.742664438034658j)
LOGGAMMA_NEG_2_5_1I = (-2.3441906524655924-8.304127986657926j)
LOGGAMMA_0_1_50I = (-79.18568460858947+144.97206505719842j)
LOGGAMMA_80_M30I = (263.7580093436582-131.95637023172426j)

D_3P2I_025_05 = (0.7028316920227291+0.35918518928584237j)
D_40I_025_05 = (2.5206061396408606+2.435224181666643j)
D_M1_5_07_025 = -3.493768475757902

CELL_M_3P4I_TH1_D05 = (0.22707209723964789-0.12037305413990895j)
CELL_M_300I_TH1_D05 = (0.023026276952309688-0.023044515540631094j)
CELL_M_2_5_TH10_D075 = 0.02557612576496444
CELL_MM1_P05 = 1.3017846763002496
CELL_P05_M_2P3I_TH1 = (0.41417975902474785-0.22043032988745404j)
CELL_P03_M_2_TH5_A3 = 0.21971555549644253

HYP_1_M05_05_M1 = 1.7853981633974483
