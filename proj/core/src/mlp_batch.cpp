#include <Eigen/Core>

#include "harmonia/mlp.hpp"

namespace harmonia {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <int D, class T>
T component(const Jet<D, T>& j, int c) {
  if (c == 0) return j.v;
  if (c <= D) return j.g[static_cast<std::size_t>(c - 1)];
  return j.h[static_cast<std::size_t>(c - 1 - D)];
}

template <int D, class T>
void set_component(Jet<D, T>& j, int c, const T& v) {
  if (c == 0) {
    j.v = v;
  } else if (c <= D) {
    j.g[static_cast<std::size_t>(c - 1)] = v;
  } else {
    j.h[static_cast<std::size_t>(c - 1 - D)] = v;
  }
}

inline std::size_t at(int unit, int comp, int point, int kc, int n) {
  return (static_cast<std::size_t>(unit) * static_cast<std::size_t>(kc) + static_cast<std::size_t>(comp)) *
             static_cast<std::size_t>(n) +
         static_cast<std::size_t>(point);
}

/// Activation of one unit over all points. z and s hold kc rows of n
/// values; f receives the rows f1, f2, f3 of activation derivatives.
template <int D, class T>
void activate_rows(Activation act, const T* z, T* s, T* f, int n, int order) {
  T* F1 = f;
  T* F2 = f + n;
  T* F3 = f + 2 * n;
  for (int p = 0; p < n; ++p) {
    const auto d = detail::activation_derivs(act, z[p]);
    s[p] = d.f0;
    F1[p] = d.f1;
    F2[p] = d.f2;
    F3[p] = d.f3;
  }
  if (order < 1) return;
  for (int k = 0; k < D; ++k) {
    const T* zg = z + (1 + k) * n;
    T* sg = s + (1 + k) * n;
    for (int p = 0; p < n; ++p) sg[p] = F1[p] * zg[p];
  }
  if (order < 2) return;
  for (int k = 0; k < D; ++k) {
    const T* zk = z + (1 + k) * n;
    for (int l = 0; l < D; ++l) {
      const T* zl = z + (1 + l) * n;
      const T* zh = z + (1 + D + k * D + l) * n;
      T* sh = s + (1 + D + k * D + l) * n;
      for (int p = 0; p < n; ++p) sh[p] = F2[p] * (zk[p] * zl[p]) + F1[p] * zh[p];
    }
  }
}

/// Adjoint of activate_rows: zbar from the activation adjoint sbar.
template <int D, class T>
void activate_rows_backward(const T* z, const T* f, const T* sbar, T* zbar, int n, int order) {
  const T* F1 = f;
  const T* F2 = f + n;
  const T* F3 = f + 2 * n;
  for (int p = 0; p < n; ++p) zbar[p] = conj_if(F1[p]) * sbar[p];
  if (order < 1) return;
  for (int k = 0; k < D; ++k) {
    const T* zg = z + (1 + k) * n;
    const T* gb = sbar + (1 + k) * n;
    T* zb = zbar + (1 + k) * n;
    for (int p = 0; p < n; ++p) {
      zbar[p] += conj_if(F2[p]) * (conj_if(zg[p]) * gb[p]);
      zb[p] = conj_if(F1[p]) * gb[p];
    }
  }
  if (order < 2) return;
  for (int k = 0; k < D; ++k) {
    const T* zk = z + (1 + k) * n;
    T* zbk = zbar + (1 + k) * n;
    for (int l = 0; l < D; ++l) {
      const T* zl = z + (1 + l) * n;
      const T* zh = z + (1 + D + k * D + l) * n;
      const T* hb = sbar + (1 + D + k * D + l) * n;
      const T* hbt = sbar + (1 + D + l * D + k) * n;
      T* zhb = zbar + (1 + D + k * D + l) * n;
      for (int p = 0; p < n; ++p) {
        zbar[p] += conj_if(F3[p]) * (conj_if(zk[p] * zl[p]) * hb[p]) + conj_if(F2[p]) * (conj_if(zh[p]) * hb[p]);
        zbk[p] += conj_if(F2[p]) * ((hb[p] + hbt[p]) * conj_if(zl[p]));
        zhb[p] = conj_if(F1[p]) * hb[p];
      }
    }
  }
}

}  // namespace

template <int D, class T>
void Mlp<D, T>::forward_batch(std::span<const double> params, std::span<const Jet<D, T>> inputs, int points,
                              int order, BatchTape& tape) const {
  if (points < 1) throw Error("Mlp::forward_batch: empty batch");
  if (inputs.size() != static_cast<std::size_t>(points) * static_cast<std::size_t>(spec_.input_dim)) {
    throw Error("Mlp::forward_batch: expected input_dim jets per point");
  }
  if (params.size() != param_count()) throw Error("Mlp::forward_batch: parameter vector has the wrong length");
  const int L = layers();
  const int kc = components(order);
  const int n = points;
  const Eigen::Index cols = static_cast<Eigen::Index>(kc) * n;
  tape.order = order;
  tape.points = n;
  tape.act.resize(static_cast<std::size_t>(L) + 1);
  tape.pre.resize(static_cast<std::size_t>(L));
  tape.deriv.resize(static_cast<std::size_t>(L));

  auto& a0 = tape.act[0];
  a0.assign(static_cast<std::size_t>(spec_.input_dim) * static_cast<std::size_t>(cols), T(0));
  for (int p = 0; p < n; ++p) {
    for (int j = 0; j < spec_.input_dim; ++j) {
      const auto& x = inputs[static_cast<std::size_t>(p) * static_cast<std::size_t>(spec_.input_dim) +
                             static_cast<std::size_t>(j)];
      for (int c = 0; c < kc; ++c) a0[at(j, c, p, kc, n)] = component(x, c);
    }
  }

  tape.params.assign(entries(params), entries(params) + entries_);
  const T* P = tape.params.data();
  for (int l = 0; l < L; ++l) {
    const int nin = dims_[static_cast<std::size_t>(l)];
    const int nout = dims_[static_cast<std::size_t>(l) + 1];
    Eigen::Map<const RowMat<T>> W(P + w_offset_[static_cast<std::size_t>(l)], nout, nin);
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(P + b_offset_[static_cast<std::size_t>(l)], nout);
    const auto& a = tape.act[static_cast<std::size_t>(l)];
    auto& z = tape.pre[static_cast<std::size_t>(l)];
    z.resize(static_cast<std::size_t>(nout) * static_cast<std::size_t>(cols));
    Eigen::Map<const RowMat<T>> A(a.data(), nin, cols);
    Eigen::Map<RowMat<T>> Z(z.data(), nout, cols);
    Z.noalias() = W * A;
    Z.leftCols(n).colwise() += b;

    auto& out = tape.act[static_cast<std::size_t>(l) + 1];
    if (l == L - 1) {
      out = z;
      continue;
    }
    out.resize(z.size());
    auto& f = tape.deriv[static_cast<std::size_t>(l)];
    f.resize(static_cast<std::size_t>(nout) * 3 * static_cast<std::size_t>(n));
    for (int i = 0; i < nout; ++i) {
      activate_rows<D, T>(spec_.activation, z.data() + at(i, 0, 0, kc, n), out.data() + at(i, 0, 0, kc, n),
                          f.data() + at(i, 0, 0, 3, n), n, order);
    }
  }
}

template <int D, class T>
Jet<D, T> Mlp<D, T>::batch_output(const BatchTape& tape, int p, int k) const {
  const int kc = components(tape.order);
  Jet<D, T> r;
  const auto& top = tape.act.back();
  for (int c = 0; c < kc; ++c) set_component(r, c, top[at(k, c, p, kc, tape.points)]);
  return r;
}

template <int D, class T>
void Mlp<D, T>::backward_batch(std::span<const double> params, BatchTape& tape, std::span<const Jet<D, T>> out_adj,
                               std::span<double> grad) const {
  const int n = tape.points;
  if (out_adj.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(spec_.output_dim)) {
    throw Error("Mlp::backward_batch: expected output_dim adjoints per point");
  }
  if (grad.size() != param_count()) throw Error("Mlp::backward_batch: gradient vector has the wrong length");
  const int L = layers();
  const int order = tape.order;
  const int kc = components(order);
  const Eigen::Index cols = static_cast<Eigen::Index>(kc) * n;
  if (tape.params.empty()) throw Error("Mlp::backward_batch: no forward pass on this tape");
  (void)params;
  const T* P = tape.params.data();
  auto& gacc = tape.grad;
  gacc.assign(tape.params.size(), T(0));
  T* G = gacc.data();

  auto& abar = tape.adj_a;
  abar.assign(static_cast<std::size_t>(spec_.output_dim) * static_cast<std::size_t>(cols), T(0));
  for (int p = 0; p < n; ++p) {
    for (int k = 0; k < spec_.output_dim; ++k) {
      const auto& j = out_adj[static_cast<std::size_t>(p) * static_cast<std::size_t>(spec_.output_dim) +
                              static_cast<std::size_t>(k)];
      for (int c = 0; c < kc; ++c) abar[at(k, c, p, kc, n)] = component(j, c);
    }
  }

  auto& next = tape.adj_c;
  for (int l = L - 1; l >= 0; --l) {
    const int nin = dims_[static_cast<std::size_t>(l)];
    const int nout = dims_[static_cast<std::size_t>(l) + 1];
    const T* zbar_data = abar.data();
    if (l != L - 1) {
      auto& zbar = tape.adj_b;
      zbar.resize(abar.size());
      const auto& z = tape.pre[static_cast<std::size_t>(l)];
      for (int i = 0; i < nout; ++i) {
        const std::size_t o = at(i, 0, 0, kc, n);
        activate_rows_backward<D, T>(z.data() + o, tape.deriv[static_cast<std::size_t>(l)].data() + at(i, 0, 0, 3, n),
                                     abar.data() + o, zbar.data() + o, n, order);
      }
      zbar_data = zbar.data();
    }
    Eigen::Map<const RowMat<T>> Zbar(zbar_data, nout, cols);
    Eigen::Map<const RowMat<T>> A(tape.act[static_cast<std::size_t>(l)].data(), nin, cols);
    Eigen::Map<RowMat<T>> Wbar(G + w_offset_[static_cast<std::size_t>(l)], nout, nin);
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> bbar(G + b_offset_[static_cast<std::size_t>(l)], nout);
    Wbar.noalias() += Zbar * A.adjoint();
    bbar += Zbar.leftCols(n).rowwise().sum();
    if (l > 0) {
      Eigen::Map<const RowMat<T>> W(P + w_offset_[static_cast<std::size_t>(l)], nout, nin);
      next.resize(static_cast<std::size_t>(nin) * static_cast<std::size_t>(cols));
      Eigen::Map<RowMat<T>> Abar(next.data(), nin, cols);
      Abar.noalias() = W.adjoint() * Zbar;
      abar.swap(next);
    }
  }
  T* out = reinterpret_cast<T*>(grad.data());
  for (std::size_t i = 0; i < gacc.size(); ++i) out[i] += gacc[i];
}

template class Mlp<2, double>;
template class Mlp<3, double>;
template class Mlp<4, double>;
template class Mlp<2, std::complex<double>>;
template class Mlp<3, std::complex<double>>;
template class Mlp<4, std::complex<double>>;

}  // namespace harmonia
