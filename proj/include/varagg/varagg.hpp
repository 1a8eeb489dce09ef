// Copyright 2026 The varagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "varagg/error.hpp"
#include "varagg/expr.hpp"
#include "varagg/expr_ops.hpp"
#include "varagg/generator.hpp"
#include "varagg/incidence.hpp"
#include "varagg/model.hpp"
#include "varagg/model_io.hpp"
#include "varagg/report.hpp"
#include "varagg/strategies.hpp"
#include "varagg/transform.hpp"
