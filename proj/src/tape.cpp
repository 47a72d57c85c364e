#include "paragen/tape.hpp"

#include <cmath>
#include <string>

#include "paragen/errors.hpp"
#include "paragen/kernels.hpp"

namespace paragen {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw DimensionError(message);
}

} // namespace

void Tape::check(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) {
    throw std::out_of_range("tape: invalid variable handle");
  }
}

const Tensor& Tape::val(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad_ref(std::size_t id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(val(id).shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

Var Tape::push(Tensor value, std::function<void()> backward) {
  Node n;
  n.value = std::move(value);
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::constant(Tensor value) { return push(std::move(value)); }

Var Tape::parameter(const Tensor& value, Tensor* grad_sink) {
  if (grad_sink && !grad_sink->same_shape(value)) {
    throw DimensionError("parameter gradient sink " + shape_string(grad_sink->shape()) +
                         " does not match value " + shape_string(value.shape()));
  }
  Node n;
  n.external = &value;
  n.sink = grad_sink;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  check(v);
  return val(v.id);
}

double Tape::scalar(Var v) const {
  const Tensor& t = value(v);
  require(t.size() == 1, "scalar: tensor has shape " + shape_string(t.shape()));
  return t[0];
}

Tensor Tape::grad(Var v) const {
  check(v);
  const Node& n = nodes_[v.id];
  return n.has_grad ? n.grad : Tensor(val(v.id).shape(), 0.0);
}

Var Tape::matvec(Var w, Var x) {
  check(w);
  check(x);
  Tensor out = ops::matvec(val(w.id), val(x.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, w, x] {
    const Tensor& g = out_grad(self);
    const Tensor& wv = val(w.id);
    kernels::ger_acc(grad_ref(w.id).raw(), wv.rows(), wv.cols(), g.raw(), val(x.id).raw());
    kernels::gemv_t_acc(wv.raw(), wv.rows(), wv.cols(), g.raw(), grad_ref(x.id).raw());
  });
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  Tensor out = ops::matmul(val(a.id), val(b.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, a, b] {
    const Tensor& g = out_grad(self);
    const Tensor& av = val(a.id);
    const Tensor& bv = val(b.id);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    // dA += G B^T, dB += A^T G
    kernels::gemm(false, true, m, k, n, g.raw(), bv.raw(), grad_ref(a.id).raw(), true);
    kernels::gemm(true, false, k, n, m, av.raw(), g.raw(), grad_ref(b.id).raw(), true);
  });
}

Var Tape::transpose(Var a) {
  check(a);
  Tensor out = ops::transpose(val(a.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, a] {
    const Tensor& g = out_grad(self);
    Tensor& ga = grad_ref(a.id);
    const std::size_t r = ga.rows(), c = ga.cols();
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
    }
  });
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  Tensor out = ops::add(val(a.id), val(b.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, a, b] {
    const Tensor& g = out_grad(self);
    Tensor& ga = grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var Tape::add_rows(Var m, Var v) {
  check(m);
  check(v);
  const Tensor& mv = val(m.id);
  const Tensor& vv = val(v.id);
  require(mv.rank() == 2 && vv.rank() == 1 && mv.cols() == vv.size(),
          "add_rows: incompatible shapes " + shape_string(mv.shape()) + " and " +
              shape_string(vv.shape()));
  Tensor out = mv;
  const std::size_t rows = mv.rows(), cols = mv.cols();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] += vv[j];
  }
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, m, v, rows, cols] {
    const Tensor& g = out_grad(self);
    Tensor& gm = grad_ref(m.id);
    for (std::size_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) gv[j] += g[i * cols + j];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  Tensor out = ops::mul(val(a.id), val(b.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, a, b] {
    const Tensor& g = out_grad(self);
    const Tensor& av = val(a.id);
    const Tensor& bv = val(b.id);
    Tensor& ga = grad_ref(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Tensor& gb = grad_ref(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var Tape::scale(Var v, Var s) {
  check(v);
  check(s);
  require(val(s.id).size() == 1,
          "scale: factor must have one element, got " + shape_string(val(s.id).shape()));
  Tensor out = val(v.id);
  const double factor = val(s.id)[0];
  for (double& x : out.data()) x *= factor;
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v, s] {
    const Tensor& g = out_grad(self);
    const Tensor& vv = val(v.id);
    const double factor = val(s.id)[0];
    Tensor& gv = grad_ref(v.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      gv[i] += g[i] * factor;
      acc += g[i] * vv[i];
    }
    grad_ref(s.id)[0] += acc;
  });
}

Var Tape::one_minus(Var v) {
  check(v);
  Tensor out = val(v.id);
  for (double& x : out.data()) x = 1.0 - x;
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v] {
    const Tensor& g = out_grad(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] -= g[i];
  });
}

Var Tape::neg(Var v) {
  check(v);
  Tensor out = val(v.id);
  for (double& x : out.data()) x = -x;
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v] {
    const Tensor& g = out_grad(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] -= g[i];
  });
}

Var Tape::tanh(Var v) {
  check(v);
  Tensor out = ops::tanh_op(val(v.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v] {
    const Tensor& g = out_grad(self);
    const Tensor& y = val(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::sigmoid(Var v) {
  check(v);
  Tensor out = ops::sigmoid_op(val(v.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v] {
    const Tensor& g = out_grad(self);
    const Tensor& y = val(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::softmax(Var v) {
  check(v);
  Tensor out = ops::softmax(val(v.id));
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v] {
    const Tensor& g = out_grad(self);
    const Tensor& y = val(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += y[i] * (g[i] - dot);
  });
}

Var Tape::log_clamped(Var v, double floor) {
  check(v);
  Tensor out = val(v.id);
  for (double& x : out.data()) x = ops::log_clamped(x, floor);
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, v, floor] {
    const Tensor& g = out_grad(self);
    const Tensor& x = val(v.id);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > floor) gv[i] += g[i] / x[i];
    }
  });
}

Var Tape::concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Tape::concat(std::span<const Var> parts) {
  require(!parts.empty(), "concat: no inputs");
  std::vector<double> data;
  std::vector<std::size_t> offsets;
  for (Var p : parts) {
    check(p);
    const Tensor& t = val(p.id);
    require(t.rank() == 1, "concat: expected vectors, got " + shape_string(t.shape()));
    offsets.push_back(data.size());
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  const std::size_t self = nodes_.size();
  return push(Tensor::vector(std::move(data)), [this, self, inputs, offsets] {
    const Tensor& g = out_grad(self);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      Tensor& gp = grad_ref(inputs[k].id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[k] + i];
    }
  });
}

Var Tape::slice(Var v, std::size_t begin, std::size_t length) {
  check(v);
  const Tensor& t = val(v.id);
  require(t.rank() == 1 && length > 0 && begin + length <= t.size(),
          "slice: range [" + std::to_string(begin) + ", " + std::to_string(begin + length) +
              ") outside " + shape_string(t.shape()));
  std::vector<double> data(t.data().begin() + begin, t.data().begin() + begin + length);
  const std::size_t self = nodes_.size();
  return push(Tensor::vector(std::move(data)), [this, self, v, begin] {
    const Tensor& g = out_grad(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < g.size(); ++i) gv[begin + i] += g[i];
  });
}

Var Tape::columns(Var m, std::size_t begin, std::size_t count) {
  check(m);
  const Tensor& t = val(m.id);
  require(t.rank() == 2 && count > 0 && begin + count <= t.cols(),
          "columns: range outside " + shape_string(t.shape()));
  const std::size_t rows = t.rows(), cols = t.cols();
  Tensor out({rows, count});
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = t[i * cols + begin + j];
  }
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, m, begin, count, rows, cols] {
    const Tensor& g = out_grad(self);
    Tensor& gm = grad_ref(m.id);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < count; ++j) gm[i * cols + begin + j] += g[i * count + j];
    }
  });
}

Var Tape::gather_rows(Var table, std::span<const std::size_t> ids) {
  check(table);
  const Tensor& t = val(table.id);
  require(t.rank() == 2 && !ids.empty(), "gather_rows: expected a matrix and nonempty ids");
  const std::size_t width = t.cols();
  Tensor out({ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= t.rows()) {
      throw DimensionError("gather_rows: row " + std::to_string(ids[r]) + " outside " +
                           shape_string(t.shape()));
    }
    auto src = t.row(ids[r]);
    std::copy(src.begin(), src.end(), out.raw() + r * width);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, table, rows, width] {
    const Tensor& g = out_grad(self);
    Tensor& gt = grad_ref(table.id);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < width; ++j) gt[rows[r] * width + j] += g[r * width + j];
    }
  });
}

Var Tape::row(Var m, std::size_t i) {
  check(m);
  const Tensor& t = val(m.id);
  require(t.rank() == 2 && i < t.rows(), "row: index outside " + shape_string(t.shape()));
  auto src = t.row(i);
  const std::size_t width = t.cols();
  const std::size_t self = nodes_.size();
  return push(Tensor::vector(std::vector<double>(src.begin(), src.end())),
              [this, self, m, i, width] {
                const Tensor& g = out_grad(self);
                Tensor& gm = grad_ref(m.id);
                for (std::size_t j = 0; j < width; ++j) gm[i * width + j] += g[j];
              });
}

Var Tape::stack(std::span<const Var> rows) {
  require(!rows.empty(), "stack: no rows");
  check(rows[0]);
  const std::size_t width = val(rows[0].id).size();
  Tensor out({rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    check(rows[r]);
    const Tensor& t = val(rows[r].id);
    require(t.rank() == 1 && t.size() == width,
            "stack: row " + std::to_string(r) + " has shape " + shape_string(t.shape()));
    std::copy(t.data().begin(), t.data().end(), out.raw() + r * width);
  }
  std::vector<Var> inputs(rows.begin(), rows.end());
  const std::size_t self = nodes_.size();
  return push(std::move(out), [this, self, inputs, width] {
    const Tensor& g = out_grad(self);
    for (std::size_t r = 0; r < inputs.size(); ++r) {
      Tensor& gr = grad_ref(inputs[r].id);
      for (std::size_t j = 0; j < width; ++j) gr[j] += g[r * width + j];
    }
  });
}

Var Tape::pad(Var v, std::size_t size) {
  check(v);
  const Tensor& t = val(v.id);
  require(t.rank() == 1 && size >= t.size(),
          "pad: cannot pad " + shape_string(t.shape()) + " to " + std::to_string(size));
  std::vector<double> data(size, 0.0);
  std::copy(t.data().begin(), t.data().end(), data.begin());
  const std::size_t self = nodes_.size();
  return push(Tensor::vector(std::move(data)), [this, self, v] {
    const Tensor& g = out_grad(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += g[i];
  });
}

Var Tape::scatter_add(Var v, std::span<const std::size_t> index, std::size_t size) {
  check(v);
  const Tensor& t = val(v.id);
  require(t.rank() == 1 && t.size() == index.size(),
          "scatter_add: " + std::to_string(index.size()) + " indices for " +
              shape_string(t.shape()));
  std::vector<double> data(size, 0.0);
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] < size, "scatter_add: index " + std::to_string(index[i]) +
                                 " outside output size " + std::to_string(size));
    data[index[i]] += t[i];
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t self = nodes_.size();
  return push(Tensor::vector(std::move(data)), [this, self, v, idx] {
    const Tensor& g = out_grad(self);
    Tensor& gv = grad_ref(v.id);
    for (std::size_t i = 0; i < idx.size(); ++i) gv[i] += g[idx[i]];
  });
}

Var Tape::pick(Var v, std::size_t i) {
  check(v);
  const Tensor& t = val(v.id);
  require(i < t.size(), "pick: index " + std::to_string(i) + " outside " + shape_string(t.shape()));
  const std::size_t self = nodes_.size();
  return push(Tensor::scalar(t[i]), [this, self, v, i] { grad_ref(v.id)[i] += out_grad(self)[0]; });
}

Var Tape::sum(Var v) {
  check(v);
  double total = 0.0;
  for (double x : val(v.id).data()) total += x;
  const std::size_t self = nodes_.size();
  return push(Tensor::scalar(total), [this, self, v] {
    const double g = out_grad(self)[0];
    for (double& x : grad_ref(v.id).data()) x += g;
  });
}

Var Tape::mean(std::span<const Var> scalars) {
  require(!scalars.empty(), "mean: no inputs");
  double total = 0.0;
  for (Var s : scalars) {
    check(s);
    require(val(s.id).size() == 1, "mean: inputs must be scalars");
    total += val(s.id)[0];
  }
  const double inv = 1.0 / static_cast<double>(scalars.size());
  std::vector<Var> inputs(scalars.begin(), scalars.end());
  const std::size_t self = nodes_.size();
  return push(Tensor::scalar(total * inv), [this, self, inputs, inv] {
    const double g = out_grad(self)[0] * inv;
    for (Var s : inputs) grad_ref(s.id)[0] += g;
  });
}

void Tape::backward(Var root) {
  check(root);
  require(val(root.id).size() == 1, "backward: root must be a scalar, got " +
                                        shape_string(val(root.id).shape()));
  for (Node& n : nodes_) {
    n.has_grad = false;
  }
  grad_ref(root.id)[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad) continue;
    if (n.backward) {
      n.backward();
    }
    if (n.sink) {
      Tensor& sink = *n.sink;
      const Tensor& g = nodes_[id].grad;
      for (std::size_t i = 0; i < g.size(); ++i) sink[i] += g[i];
    }
  }
}

} // namespace paragen
