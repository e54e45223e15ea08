// Copyright 2026 The vpe Authors.
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

#include "vpe/common.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vpe {

#ifdef _OPENMP
namespace {
int g_default_threads = 0;
}

int hardware_threads() { return omp_get_max_threads(); }

void set_num_threads(int n) {
  if (g_default_threads == 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
}
#else
int hardware_threads() { return 1; }
void set_num_threads(int) {}
#endif

}  // namespace vpe
