#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "paragen/ops.hpp"
#include "paragen/tensor.hpp"

namespace paragen {

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

/// Reverse-mode gradient tape.
///
/// Operations are recorded in creation order, which is a topological order of
/// the graph. `backward` walks it in reverse and, for parameter leaves,
/// accumulates into the caller-owned gradient tensor passed to `parameter`.
/// Parameters that never reach the root leave their sinks untouched.
///
/// One tape is meant for one forward/backward pass and is not thread-safe;
/// independent tapes can run concurrently.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // `value` is referenced, not copied, and must outlive the tape.
  Var parameter(const Tensor& value, Tensor* grad_sink);

  const Tensor& value(Var v) const;
  double scalar(Var v) const;
  // Gradient of the last backward root w.r.t. v; zeros when v was unreachable.
  Tensor grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var matvec(Var w, Var x);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  // m[N x d] + v[d] broadcast over rows.
  Var add_rows(Var m, Var v);
  Var mul(Var a, Var b);
  // v * s for a one-element s.
  Var scale(Var v, Var s);
  Var one_minus(Var v);
  Var neg(Var v);
  Var tanh(Var v);
  Var sigmoid(Var v);
  Var softmax(Var v);
  Var log_clamped(Var v, double floor = ops::kLogFloor);
  Var concat(std::initializer_list<Var> parts);
  Var concat(std::span<const Var> parts);
  Var slice(Var v, std::size_t begin, std::size_t length);
  Var columns(Var m, std::size_t begin, std::size_t count);
  Var gather_rows(Var table, std::span<const std::size_t> ids);
  Var row(Var m, std::size_t i);
  Var stack(std::span<const Var> rows);
  // Zero-extends a vector to `size` entries.
  Var pad(Var v, std::size_t size);
  // out[index[i]] += v[i]; out has `size` entries.
  Var scatter_add(Var v, std::span<const std::size_t> index, std::size_t size);
  Var pick(Var v, std::size_t i);
  Var sum(Var v);
  Var mean(std::span<const Var> scalars);

  void backward(Var root);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    Tensor* sink = nullptr;
    std::function<void()> backward;
  };

  const Tensor& val(std::size_t id) const;
  Tensor& grad_ref(std::size_t id);
  bool has_grad(std::size_t id) const { return nodes_[id].has_grad; }
  const Tensor& out_grad(std::size_t id) const { return nodes_[id].grad; }
  Var push(Tensor value, std::function<void()> backward = {});
  void check(Var v) const;

  std::vector<Node> nodes_;
};

} // namespace paragen
