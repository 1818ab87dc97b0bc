#include <cstdlib>

#include "pflow/kernels.hpp"

namespace pflow::kernels {

const Ops& ops() {
  static const Ops* selected = [] {
    if (std::getenv("PERIODFLOW_FORCE_SCALAR") != nullptr)
      return &scalar_ops();
    if (const Ops* a = avx2_ops()) return a;
    return &scalar_ops();
  }();
  return *selected;
}

}  // namespace pflow::kernels
