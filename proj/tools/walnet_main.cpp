/*
 * Copyright 2026 The walnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <malloc.h>

#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "walnet/cli/app.hpp"

int main(int argc, char** argv) {
  // Large activation buffers are freed and reallocated every step; keeping
  // them on the heap instead of fresh mmaps avoids repeated page faults.
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  spdlog::set_default_logger(spdlog::stderr_color_mt("walnet"));
  std::vector<std::string> args(argv + 1, argv + argc);
  return walnet::cli::run(args, std::cout, std::cerr);
}
