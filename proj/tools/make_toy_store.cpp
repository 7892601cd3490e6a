//
// Copyright (C) 2026 The rfiqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Writes the bundled toy fixture: 8 pristine groups x 6 distorted records
// with a planted quality function.
//
//   make_toy_store <out_dir>

#include <iostream>

#include "rfiqa/planted.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <out_dir>\n";
    return 64;
  }
  rfiqa::planted::PlantedOptions options;
  options.n_groups = 8;
  options.n_archetypes = 2;
  options.n_types = 3;
  options.n_levels = 2;
  options.semantic_dim = 64;
  options.distortion_dim = 32;
  options.dataset_name = "toy";
  options.seed = 2024;
  try {
    const auto planted = rfiqa::planted::make_planted_store(options);
    rfiqa::save_store(planted.store, argv[1]);
    std::cout << "wrote " << planted.store.records().size() << " records to " << argv[1] << "\n";
  } catch (const rfiqa::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
