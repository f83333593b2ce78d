#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dfept/matrix.hpp"

namespace dfept {

/// Named trainable matrix with an accumulated gradient.
template <class T>
struct Parameter {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;

  Parameter() = default;
  Parameter(std::string n, Matrix<T> v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad = Matrix<T>(value.rows(), value.cols()); }
};

template <class T>
class Tape;

/// Handle to a value recorded on a tape.
template <class T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t index = 0;

  const Matrix<T>& value() const { return tape->value(*this); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Sparse row-major operator used for neighbourhood aggregation: out[v] = sum_u w(v,u) * in[u].
template <class T>
struct SparseRows {
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::size_t, T>>> rows;
};

/// Reverse-mode tape over matrix-valued primitives.
///
/// Every recorded node keeps the closure that produced it, so replay()
/// recomputes all derived values from the current leaves.
template <class T>
class Tape {
 public:
  using Forward = std::function<Matrix<T>(const Tape&)>;
  using Backward = std::function<void(Tape&, std::size_t)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value) { return push(std::move(value), nullptr, nullptr, nullptr); }

  /// Leaf bound to a parameter. With trainable=false the value is recorded as a constant.
  Var<T> parameter(Parameter<T>& p, bool trainable = true) {
    return push(p.value, nullptr, nullptr, trainable ? &p : nullptr);
  }

  Var<T> record(Forward forward, Backward backward) {
    Matrix<T> v = forward(*this);
    return push(std::move(v), std::move(forward), std::move(backward), nullptr);
  }

  const Matrix<T>& value(Var<T> v) const { return nodes_.at(v.index).value; }
  const Matrix<T>& value(std::size_t i) const { return nodes_[i].value; }
  Matrix<T>& value_mut(Var<T> v) { return nodes_.at(v.index).value; }
  const Matrix<T>& adjoint(Var<T> v) const { return nodes_.at(v.index).adjoint; }
  const Matrix<T>& adjoint(std::size_t i) const { return nodes_[i].adjoint; }
  Matrix<T>& adjoint_mut(std::size_t i) { return nodes_[i].adjoint; }
  std::size_t size() const { return nodes_.size(); }

  /// Recompute every derived node in recording order.
  void replay() {
    for (auto& n : nodes_)
      if (n.forward) n.value = n.forward(*this);
  }

  /// Reverse sweep from a 1x1 loss. Adds the adjoint of each trainable leaf into its Parameter::grad.
  void backward(Var<T> loss) {
    const Matrix<T>& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1)
      throw Error(ErrorKind::ContractViolation,
                  "backward needs a scalar loss, got " + shape_string(lv.rows(), lv.cols()));
    for (auto& n : nodes_) n.adjoint = Matrix<T>(n.value.rows(), n.value.cols());
    nodes_[loss.index].adjoint(0, 0) = T{1};
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward) n.backward(*this, i);
      if (n.param) {
        Matrix<T>& g = n.param->grad;
        if (g.rows() != n.value.rows() || g.cols() != n.value.cols()) g = Matrix<T>(n.value.rows(), n.value.cols());
        for (std::size_t k = 0; k < g.size(); ++k) g.data()[k] += n.adjoint.data()[k];
      }
    }
  }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> adjoint;
    Forward forward;
    Backward backward;
    Parameter<T>* param = nullptr;
  };

  Var<T> push(Matrix<T> value, Forward f, Backward b, Parameter<T>* p) {
    nodes_.push_back(Node{std::move(value), {}, std::move(f), std::move(b), p});
    return Var<T>{this, nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
};

namespace ad {

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  Tape<T>& t = *a.tape;
  const std::size_t ia = a.index, ib = b.index;
  if (a.cols() != b.rows())
    throw Error(ErrorKind::ShapeError,
                "matmul " + shape_string(a.rows(), a.cols()) + " * " + shape_string(b.rows(), b.cols()));
  return t.record([=](const Tape<T>& tp) { return dfept::matmul(tp.value(ia), tp.value(ib)); },
                  [=](Tape<T>& tp, std::size_t self) {
                    const Matrix<T>& g = tp.adjoint(self);
                    const Matrix<T>& av = tp.value(ia);
                    const Matrix<T>& bv = tp.value(ib);
                    // dA += G * B^T, dB += A^T * G
                    Matrix<T>& da = tp.adjoint_mut(ia);
                    for (std::size_t i = 0; i < av.rows(); ++i)
                      for (std::size_t k = 0; k < av.cols(); ++k) {
                        T s{};
                        for (std::size_t j = 0; j < bv.cols(); ++j) s += g(i, j) * bv(k, j);
                        da(i, k) += s;
                      }
                    Matrix<T>& db = tp.adjoint_mut(ib);
                    for (std::size_t i = 0; i < av.rows(); ++i)
                      for (std::size_t k = 0; k < av.cols(); ++k) {
                        const T aik = av(i, k);
                        for (std::size_t j = 0; j < bv.cols(); ++j) db(k, j) += aik * g(i, j);
                      }
                  });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  const std::size_t ia = a.index, ib = b.index;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::ShapeError,
                "add " + shape_string(a.rows(), a.cols()) + " + " + shape_string(b.rows(), b.cols()));
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        const auto& bv = tp.value(ib).data();
        for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] += bv[k];
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const auto& g = tp.adjoint(self).data();
        auto& da = tp.adjoint_mut(ia).data();
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += g[k];
        auto& db = tp.adjoint_mut(ib).data();
        for (std::size_t k = 0; k < g.size(); ++k) db[k] += g[k];
      });
}

/// a (n x c) + row (1 x c) broadcast over rows.
template <class T>
Var<T> add_row(Var<T> a, Var<T> row) {
  const std::size_t ia = a.index, ir = row.index;
  if (row.rows() != 1 || row.cols() != a.cols())
    throw Error(ErrorKind::ShapeError, "add_row: bias " + shape_string(row.rows(), row.cols()) + " for " +
                                           shape_string(a.rows(), a.cols()));
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        const Matrix<T>& r = tp.value(ir);
        for (std::size_t i = 0; i < out.rows(); ++i)
          for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += r(0, j);
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        Matrix<T>& da = tp.adjoint_mut(ia);
        Matrix<T>& dr = tp.adjoint_mut(ir);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < g.cols(); ++j) {
            da(i, j) += g(i, j);
            dr(0, j) += g(i, j);
          }
      });
}

template <class T>
Var<T> hadamard(Var<T> a, Var<T> b) {
  const std::size_t ia = a.index, ib = b.index;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::ShapeError,
                "hadamard " + shape_string(a.rows(), a.cols()) + " * " + shape_string(b.rows(), b.cols()));
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        const auto& bv = tp.value(ib).data();
        for (std::size_t k = 0; k < out.size(); ++k) out.data()[k] *= bv[k];
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const auto& g = tp.adjoint(self).data();
        const auto& av = tp.value(ia).data();
        const auto& bv = tp.value(ib).data();
        auto& da = tp.adjoint_mut(ia).data();
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += g[k] * bv[k];
        auto& db = tp.adjoint_mut(ib).data();
        for (std::size_t k = 0; k < g.size(); ++k) db[k] += g[k] * av[k];
      });
}

/// scale * a + shift, elementwise.
template <class T>
Var<T> affine(Var<T> a, T scale, T shift) {
  const std::size_t ia = a.index;
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        for (T& v : out.data()) v = scale * v + shift;
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const auto& g = tp.adjoint(self).data();
        auto& da = tp.adjoint_mut(ia).data();
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += scale * g[k];
      });
}

template <class T>
Var<T> relu(Var<T> a) {
  const std::size_t ia = a.index;
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        for (T& v : out.data()) v = v > T{} ? v : T{};
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const auto& g = tp.adjoint(self).data();
        const auto& av = tp.value(ia).data();
        auto& da = tp.adjoint_mut(ia).data();
        for (std::size_t k = 0; k < g.size(); ++k)
          if (av[k] > T{}) da[k] += g[k];
      });
}

/// Logistic function in the overflow-free two-branch form.
template <class T>
T logistic(T x) {
  if (x >= T{}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

template <class T>
Var<T> sigmoid(Var<T> a) {
  const std::size_t ia = a.index;
  return a.tape->record(
      [=](const Tape<T>& tp) {
        Matrix<T> out = tp.value(ia);
        for (T& v : out.data()) v = logistic(v);
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const auto& g = tp.adjoint(self).data();
        const auto& y = tp.value(self).data();
        auto& da = tp.adjoint_mut(ia).data();
        for (std::size_t k = 0; k < g.size(); ++k) da[k] += g[k] * y[k] * (T{1} - y[k]);
      });
}

/// Column-wise sum over rows: n x c -> 1 x c.
template <class T>
Var<T> sum_rows(Var<T> a) {
  const std::size_t ia = a.index;
  return a.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& av = tp.value(ia);
        Matrix<T> out(1, av.cols());
        for (std::size_t i = 0; i < av.rows(); ++i)
          for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        Matrix<T>& da = tp.adjoint_mut(ia);
        for (std::size_t i = 0; i < da.rows(); ++i)
          for (std::size_t j = 0; j < da.cols(); ++j) da(i, j) += g(0, j);
      });
}

template <class T>
Var<T> mean_rows(Var<T> a) {
  if (a.rows() == 0) throw Error(ErrorKind::EmptyGraph, "mean over zero rows");
  const T inv = T{1} / static_cast<T>(a.rows());
  return affine(sum_rows(a), inv, T{});
}

/// Column-wise max over rows; the gradient goes to the first maximal row.
template <class T>
Var<T> max_rows(Var<T> a) {
  const std::size_t ia = a.index;
  if (a.rows() == 0) throw Error(ErrorKind::EmptyGraph, "max over zero rows");
  auto argmax = [](const Matrix<T>& av, std::size_t j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < av.rows(); ++i)
      if (av(i, j) > av(best, j)) best = i;
    return best;
  };
  return a.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& av = tp.value(ia);
        Matrix<T> out(1, av.cols());
        for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) = av(argmax(av, j), j);
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        const Matrix<T>& av = tp.value(ia);
        Matrix<T>& da = tp.adjoint_mut(ia);
        for (std::size_t j = 0; j < av.cols(); ++j) da(argmax(av, j), j) += g(0, j);
      });
}

/// Sum of all entries -> 1 x 1.
template <class T>
Var<T> sum_all(Var<T> a) {
  const std::size_t ia = a.index;
  return a.tape->record(
      [=](const Tape<T>& tp) {
        T s{};
        for (T v : tp.value(ia).data()) s += v;
        return Matrix<T>(1, 1, s);
      },
      [=](Tape<T>& tp, std::size_t self) {
        const T g = tp.adjoint(self)(0, 0);
        for (T& d : tp.adjoint_mut(ia).data()) d += g;
      });
}

/// Horizontal concatenation [a | b].
template <class T>
Var<T> concat_cols(Var<T> a, Var<T> b) {
  const std::size_t ia = a.index, ib = b.index;
  if (a.rows() != b.rows())
    throw Error(ErrorKind::ShapeError,
                "concat " + shape_string(a.rows(), a.cols()) + " | " + shape_string(b.rows(), b.cols()));
  return a.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& av = tp.value(ia);
        const Matrix<T>& bv = tp.value(ib);
        Matrix<T> out(av.rows(), av.cols() + bv.cols());
        for (std::size_t i = 0; i < av.rows(); ++i) {
          std::copy(av.row(i).begin(), av.row(i).end(), out.row(i).begin());
          std::copy(bv.row(i).begin(), bv.row(i).end(), out.row(i).begin() + static_cast<std::ptrdiff_t>(av.cols()));
        }
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        Matrix<T>& da = tp.adjoint_mut(ia);
        Matrix<T>& db = tp.adjoint_mut(ib);
        for (std::size_t i = 0; i < g.rows(); ++i) {
          for (std::size_t j = 0; j < da.cols(); ++j) da(i, j) += g(i, j);
          for (std::size_t j = 0; j < db.cols(); ++j) db(i, j) += g(i, da.cols() + j);
        }
      });
}

/// out = S * h with a constant sparse S (neighbour aggregation).
template <class T>
Var<T> propagate(std::shared_ptr<const SparseRows<T>> s, Var<T> h) {
  const std::size_t ih = h.index;
  if (s->cols != h.rows() || s->rows.size() != h.rows())
    throw Error(ErrorKind::ShapeError, "propagate: operator " + shape_string(s->rows.size(), s->cols) +
                                           " for states " + shape_string(h.rows(), h.cols()));
  return h.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& hv = tp.value(ih);
        Matrix<T> out(s->rows.size(), hv.cols());
        for (std::size_t v = 0; v < s->rows.size(); ++v) {
          auto orow = out.row(v);
          for (const auto& [u, w] : s->rows[v]) {
            auto hrow = hv.row(u);
            for (std::size_t j = 0; j < hv.cols(); ++j) orow[j] += w * hrow[j];
          }
        }
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        Matrix<T>& dh = tp.adjoint_mut(ih);
        for (std::size_t v = 0; v < s->rows.size(); ++v) {
          auto grow = g.row(v);
          for (const auto& [u, w] : s->rows[v]) {
            auto drow = dh.row(u);
            for (std::size_t j = 0; j < g.cols(); ++j) drow[j] += w * grow[j];
          }
        }
      });
}

enum class SubtokenPooling { Mean, Sum, First };

/// Row i = pooled rows of `table` at ids groups[i] (an embedding lookup).
template <class T>
Var<T> gather(Var<T> table, std::vector<std::vector<std::size_t>> groups, SubtokenPooling pooling) {
  const std::size_t it = table.index;
  const std::size_t vocab = table.rows();
  for (auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::ContractViolation, "gather: empty id group");
    for (std::size_t id : g)
      if (id >= vocab) throw Error(ErrorKind::ShapeError, "gather: id " + std::to_string(id) + " out of range");
    if (pooling == SubtokenPooling::First) g.resize(1);
  }
  auto weight = [pooling](std::size_t count) {
    return pooling == SubtokenPooling::Mean ? T{1} / static_cast<T>(count) : T{1};
  };
  auto shared = std::make_shared<const std::vector<std::vector<std::size_t>>>(std::move(groups));
  return table.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& tv = tp.value(it);
        Matrix<T> out(shared->size(), tv.cols());
        for (std::size_t i = 0; i < shared->size(); ++i) {
          const auto& ids = (*shared)[i];
          auto orow = out.row(i);
          for (std::size_t id : ids)
            for (std::size_t j = 0; j < tv.cols(); ++j) orow[j] += tv(id, j);
          if (pooling == SubtokenPooling::Mean && ids.size() > 1)
            for (T& v : orow) v /= static_cast<T>(ids.size());
        }
        return out;
      },
      [=](Tape<T>& tp, std::size_t self) {
        const Matrix<T>& g = tp.adjoint(self);
        Matrix<T>& dt = tp.adjoint_mut(it);
        for (std::size_t i = 0; i < shared->size(); ++i) {
          const auto& ids = (*shared)[i];
          const T w = weight(ids.size());
          for (std::size_t id : ids)
            for (std::size_t j = 0; j < g.cols(); ++j) dt(id, j) += w * g(i, j);
        }
      });
}

/// Numerically stable log-sum-exp cross-entropy of a 1 x C logit row
/// against a class index, scaled by `weight`. Returns 1 x 1.
template <class T>
Var<T> softmax_cross_entropy(Var<T> logits, std::size_t label, T weight = T{1}) {
  const std::size_t il = logits.index;
  if (logits.rows() != 1 || label >= logits.cols())
    throw Error(ErrorKind::ShapeError, "cross entropy: label " + std::to_string(label) + " for logits " +
                                           shape_string(logits.rows(), logits.cols()));
  auto softmax = [](const Matrix<T>& z) {
    T m = z(0, 0);
    for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z(0, j));
    std::vector<T> p(z.cols());
    T s{};
    for (std::size_t j = 0; j < z.cols(); ++j) s += (p[j] = std::exp(z(0, j) - m));
    for (T& v : p) v /= s;
    return p;
  };
  return logits.tape->record(
      [=](const Tape<T>& tp) {
        const Matrix<T>& z = tp.value(il);
        T m = z(0, 0);
        for (std::size_t j = 1; j < z.cols(); ++j) m = std::max(m, z(0, j));
        T s{};
        for (std::size_t j = 0; j < z.cols(); ++j) s += std::exp(z(0, j) - m);
        return Matrix<T>(1, 1, weight * (m + std::log(s) - z(0, label)));
      },
      [=](Tape<T>& tp, std::size_t self) {
        const T g = tp.adjoint(self)(0, 0) * weight;
        const auto p = softmax(tp.value(il));
        Matrix<T>& dz = tp.adjoint_mut(il);
        for (std::size_t j = 0; j < p.size(); ++j) dz(0, j) += g * (p[j] - (j == label ? T{1} : T{}));
      });
}

}  // namespace ad
}  // namespace dfept
