// Copyright 2026 The paf-retrieval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "paf/signal.hpp"
#include "paf/rng.hpp"
#include "paf/fft.hpp"
#include "paf/measurements.hpp"
#include "paf/objective.hpp"
#include "paf/initializer.hpp"
#include "paf/solvers.hpp"
#include "paf/parallel.hpp"
#include "paf/theory.hpp"
#include "paf/experiments.hpp"
#include "paf/image_io.hpp"
#include "paf/results_io.hpp"
