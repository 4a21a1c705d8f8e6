// Generated by derive_expected.py; do not edit.
#pragma once

namespace expected {

inline constexpr double az_dc_gain = 3.7913043478260877;
inline constexpr double care_scalar = 0.41421356237309515;
inline constexpr double delay_phase_deg_200hz = -161.0076054828847;
inline constexpr double delay_phase_deg_4hz = -0.027416984220945427;
inline constexpr double delay_ratio_200hz = 5.7426055288109;
inline constexpr double delay_ratio_4hz = 1.0063751821780047;
inline constexpr double el_dc_gain = 7.147540983606559;
inline constexpr double hankel_1 = 24.604164412127297;
inline constexpr double hankel_13 = 0.02759735997220319;
inline constexpr double hankel_14 = 0.017969970749311667;
inline constexpr double np_design1_rho1e4 = 1.5662614672425033;
inline constexpr double np_rho1e3 = 0.9273300410001362;
inline constexpr double np_rho1e4 = 0.8503605050954773;
inline constexpr double pade_zero_im = 384.90017945975046;
inline constexpr double pade_zero_re = 666.6666666666669;
inline constexpr double recovery_gimbal_rho1e7 = 0.42977877681103394;
inline constexpr double recovery_mp_rel1_rho1e7 = 0.0004881312449291958;
inline constexpr double recovery_mp_rel2_rho1e7 = 0.03796896523303946;
inline constexpr double recovery_nopade_rho1e7 = 0.04417107789104414;
inline constexpr double rp_rho1e3 = 1.088627003827876;
inline constexpr double rp_rho1e4 = 1.0115525196305757;
inline constexpr double rs_rho1e3 = 0.4242105488246388;
inline constexpr double rs_rho1e4 = 0.5330436472795473;
inline constexpr double s11_1hz = 0.008104800038711833;
inline constexpr double tustin_scalar = 0.9990004997501251;
inline constexpr double w1a_crossing_hz = 72.6972380140711;
inline constexpr double w1a_dc = 0.15848095783620667;
inline constexpr double w1e_crossing_hz = 145.53103301559142;
inline constexpr double w1e_dc = 0.12207348566434244;
inline constexpr double we1_hf_gain = 0.3162555344718533;
inline constexpr double we1_hinf = 115.37897493104091;

}  // namespace expected
