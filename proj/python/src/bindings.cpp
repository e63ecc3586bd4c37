// Copyright 2026 the nervkit authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
    m.doc() = "nervkit: composable video INR compression toolkit";
}
