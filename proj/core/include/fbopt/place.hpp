#pragma once

#include "fbopt/types.hpp"

namespace fbopt {

/// Stabilizing solution of the continuous algebraic Riccati equation
///     A'P + PA - P B R^{-1} B' P + Q = 0,
/// computed from the stable invariant subspace of the Hamiltonian matrix.
/// Requires (A, B) stabilizable, Q >= 0 detectable, R > 0.
Matrix care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

/// State-feedback gain K with eig(A + BK) Hurwitz. When a target interval of
/// real parts is given the poles are placed inside it when achievable:
/// single-input controllable pairs get exact assignment at poles uniformly
/// spaced over the interval; otherwise a Riccati gain with a bisection-tuned
/// state weight pushes the rightmost pole into the interval (best effort for
/// complex pairs and uncontrollable-but-stable modes).
Matrix place_state_feedback(const Matrix& A, const Matrix& B, const Interval& region);

/// Observer gain L with eig(A - L C) Hurwitz, by duality via
/// place_state_feedback on (A', C').
Matrix place_observer_gain(const Matrix& A, const Matrix& C, const Interval& region);

}  // namespace fbopt
