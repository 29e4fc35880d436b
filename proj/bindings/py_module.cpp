#include <pybind11/pybind11.h>

#include "cqed/version.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "cavity QED simulation core";
  m.attr("__version__") = cqed::version_string;
}
