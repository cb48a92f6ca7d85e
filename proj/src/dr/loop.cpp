#include "buckdr/dr/loop.hpp"

#include <Eigen/Eigenvalues>
#include <limits>

#include "buckdr/error.hpp"

namespace buckdr::dr {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using lti::StateSpace;

namespace {

/// A signal as a linear form over the current state vector and the inputs.
struct Signal {
  RowVectorXd cx;
  RowVectorXd du;
};

/// Grows a state-space model block by block; no algebraic loops can form
/// because every block is driven by signals that already exist.
class Assembler {
 public:
  explicit Assembler(int inputs) : m_(inputs), a_(0, 0), b_(0, inputs) {}

  Signal input(int k) const {
    Signal s{RowVectorXd::Zero(n()), RowVectorXd::Zero(m_)};
    s.du(k) = 1.0;
    return s;
  }
  Signal zero() const { return {RowVectorXd::Zero(n()), RowVectorXd::Zero(m_)}; }

  Signal padded(const Signal& s) const {
    Signal out{RowVectorXd::Zero(n()), s.du};
    out.cx.head(s.cx.size()) = s.cx;
    return out;
  }
  Signal sum(const Signal& x, const Signal& y, double ky = 1.0) const {
    const Signal px = padded(x), py = padded(y);
    return {px.cx + ky * py.cx, px.du + ky * py.du};
  }

  std::vector<Signal> add_block(const StateSpace& blk, const std::vector<Signal>& ins) {
    if (static_cast<int>(ins.size()) != blk.inputs()) throw Error(Errc::DimensionMismatch, "block input count");
    const int n0 = n();
    const int nb = blk.states();
    MatrixXd cin(blk.inputs(), n0), din(blk.inputs(), m_);
    for (int k = 0; k < blk.inputs(); ++k) {
      const Signal s = padded(ins[static_cast<std::size_t>(k)]);
      cin.row(k) = s.cx;
      din.row(k) = s.du;
    }
    MatrixXd a = MatrixXd::Zero(n0 + nb, n0 + nb);
    a.topLeftCorner(n0, n0) = a_;
    a.bottomLeftCorner(nb, n0) = blk.B * cin;
    a.bottomRightCorner(nb, nb) = blk.A;
    MatrixXd b(n0 + nb, m_);
    b << b_, blk.B * din;
    a_ = std::move(a);
    b_ = std::move(b);

    std::vector<Signal> outs;
    for (int j = 0; j < blk.outputs(); ++j) {
      Signal s{RowVectorXd::Zero(n0 + nb), RowVectorXd::Zero(m_)};
      s.cx.head(n0) = blk.D.row(j) * cin;
      s.cx.tail(nb) = blk.C.row(j);
      s.du = blk.D.row(j) * din;
      outs.push_back(s);
    }
    return outs;
  }

  int n() const { return static_cast<int>(a_.rows()); }
  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }

 private:
  int m_;
  MatrixXd a_, b_;
};

}  // namespace

LoopModel LoopModel::build(const buck::BuckParams& plant, const std::optional<lti::RationalTF>& K, double Gf,
                           const DRScheme& scheme) {
  Assembler as(kLoopInputs);
  const StateSpace pss = buck::plant_state_space(plant);
  const auto y = as.add_block(pss, {as.input(kIout), as.input(kVsw)});
  const Signal vo = y[0], il = y[1];

  Signal vc;
  if (K) {
    const Signal err = as.sum(as.input(kRef), vo, -Gf);
    vc = as.add_block(lti::realize(*K), {err})[0];
  } else {
    vc = as.input(kRef);
  }

  Signal ihat = as.zero(), vinj = as.zero();
  if (scheme.kind != Kind::None) {
    std::vector<Signal> ins;
    for (Channel c : scheme.inputs) {
      switch (c) {
        case Channel::v_o: ins.push_back(vo); break;
        case Channel::i_L: ins.push_back(il); break;
        case Channel::v_SW: ins.push_back(as.input(kVsw)); break;
      }
    }
    ihat = as.add_block(scheme.estimator_ss, ins)[0];
    vinj = as.add_block(scheme.compensator_ss, {ihat})[0];
  }
  const Signal vtot = as.sum(vc, vinj);

  LoopModel lm;
  lm.A = as.a();
  lm.B = as.b();
  const int n = as.n();
  lm.C.resize(kLoopOutputs, n);
  lm.D.resize(kLoopOutputs, kLoopInputs);
  const Signal rows[kLoopOutputs] = {vo, il, vc, ihat, vinj, vtot};
  for (int k = 0; k < kLoopOutputs; ++k) {
    const Signal s = as.padded(rows[k]);
    lm.C.row(k) = s.cx;
    lm.D.row(k) = s.du;
  }
  lm.plant_states = pss.states();
  return lm;
}

StateSpace LoopModel::averaged(double k_FF) const {
  // Plant channels: inputs (ref, i_out, v_SW), outputs (all signals, v_c_tot).
  const int n = states();
  MatrixXd b(n, 3), c(kLoopOutputs + 1, n), d(kLoopOutputs + 1, 3);
  b << B.col(kRef), B.col(kIout), B.col(kVsw);
  c << C, C.row(kVcTot);
  MatrixXd dd(kLoopOutputs, 3);
  dd << D.col(kRef), D.col(kIout), D.col(kVsw);
  d << dd, dd.row(kVcTot);
  const StateSpace open(A, b, c, d);
  return lti::lower_lft(open, StateSpace::static_gain(MatrixXd::Constant(1, 1, k_FF)));
}

StateSpace assemble_inner_loop(const buck::BuckParams& plant, const DRScheme& scheme, double k_FF) {
  const StateSpace cl = LoopModel::build(plant, std::nullopt, 1.0, scheme).averaged(k_FF);
  return lti::balanced(StateSpace(cl.A, cl.B, cl.C.row(kVo), cl.D.row(kVo)));
}

std::array<lti::cplx, 2> inner_loop_response(const buck::BuckParams& plant, const DRScheme& scheme, double k_FF,
                                              lti::cplx s) {
  using cl = std::complex<long double>;
  auto ld = [](lti::cplx z) { return cl(z.real(), z.imag()); };
  const Eigen::MatrixXcd P = buck::plant_state_space(plant).response(s);  // rows (v_o, i_L), cols (i_out, v_SW)
  const cl kf = k_FF;
  // v_SW = k_FF (v_c + comp * (e_iout * i_out + e_sw * v_SW))
  cl e_iout = 0.0L, e_sw = 0.0L, comp = 0.0L;
  if (scheme.kind != Kind::None) {
    const Eigen::MatrixXcd E = scheme.estimator_ss.response(s);
    comp = ld(scheme.compensator_ss.response(s)(0, 0));
    for (std::size_t k = 0; k < scheme.inputs.size(); ++k) {
      const cl e = ld(E(0, static_cast<Eigen::Index>(k)));
      switch (scheme.inputs[k]) {
        case Channel::v_o: e_iout += e * ld(P(0, 0)); e_sw += e * ld(P(0, 1)); break;
        case Channel::i_L: e_iout += e * ld(P(1, 0)); e_sw += e * ld(P(1, 1)); break;
        case Channel::v_SW: e_sw += e; break;
      }
    }
  }
  const cl den = 1.0L - kf * comp * e_sw;
  if (std::abs(den) < 1e-12L) throw Error(Errc::IllPosed, "inner loop is singular at this frequency");
  const cl vsw_vc = kf / den;
  const cl vsw_iout = kf * comp * e_iout / den;
  const cl vo_vc = ld(P(0, 1)) * vsw_vc;
  const cl vo_iout = ld(P(0, 0)) + ld(P(0, 1)) * vsw_iout;
  return {lti::cplx(double(vo_vc.real()), double(vo_vc.imag())), lti::cplx(double(vo_iout.real()), double(vo_iout.imag()))};
}

double max_real_eig(const StateSpace& sys) {
  if (sys.states() == 0) return -std::numeric_limits<double>::infinity();
  const Eigen::VectorXcd ev = sys.eigenvalues();
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < ev.size(); ++k) m = std::max(m, ev[k].real());
  return m;
}

}  // namespace buckdr::dr
