#include <pybind11/pybind11.h>
#include "banditlab/statfn.hpp"
namespace py = pybind11;
PYBIND11_MODULE(_core, m) {
    m.def("normal_cdf", &banditlab::normal_cdf);
}
