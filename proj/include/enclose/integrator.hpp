#pragma once

#include <concepts>
#include <utility>

namespace enclose {

// Any vector-space-like state: closed under addition and scalar scaling.
template <typename S>
concept VectorSpace = requires(S a, S b, double h) {
  { a + b } -> std::convertible_to<S>;
  { h * a } -> std::convertible_to<S>;
};

/// One classical fourth-order Runge-Kutta step of dx/dt = f(t, x).
template <VectorSpace S, typename F>
  requires std::invocable<F&, double, const S&>
S rk4_step(F&& f, double t, const S& x, double h) {
  const S k1 = f(t, x);
  const S k2 = f(t + 0.5 * h, S(x + (0.5 * h) * k1));
  const S k3 = f(t + 0.5 * h, S(x + (0.5 * h) * k2));
  const S k4 = f(t + h, S(x + h * k3));
  return S(x + (h / 6.0) * S(k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace enclose
