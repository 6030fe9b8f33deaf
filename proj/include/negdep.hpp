// Copyright 2026 The negdep Authors
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


#ifndef NEGDEP_NEGDEP_HPP
#define NEGDEP_NEGDEP_HPP

#include "negdep/core.hpp"
#include "negdep/cov_diagnostics.hpp"
#include "negdep/gallery.hpp"
#include "negdep/gaussian.hpp"
#include "negdep/max_flow.hpp"
#include "negdep/na_verify.hpp"
#include "negdep/scp_coupling.hpp"
#include "negdep/stable_check.hpp"

#endif  // NEGDEP_NEGDEP_HPP
