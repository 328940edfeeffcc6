#include "ensctl/types.hpp"

namespace ensctl {

DltiSystem::DltiSystem(Matrix a_matrix, Matrix b_matrix)
    : a(std::move(a_matrix)), b(std::move(b_matrix)) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw ShapeMismatch("state matrix must be square and non-empty");
  }
  if (b.rows() != a.rows() || b.cols() == 0) {
    throw ShapeMismatch("input matrix must have n rows and at least one column");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw InvalidArgument("system matrices must be finite");
  }
}

}  // namespace ensctl
