// Copyright 2026 The heraldsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HERALDSIM_ERROR_HPP
#define HERALDSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace heraldsim {

/// Broad failure category. The CLI maps each kind onto its own exit code.
enum class ErrorKind {
    kConfig,   // invalid parameters, preconditions, malformed config files
    kCompute,  // numerically undefined results, failed fits, failed agreement checks
    kIo,       // file system and format errors
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string &what) : Error(ErrorKind::kConfig, what) {}
};

struct ComputeError : Error {
    explicit ComputeError(const std::string &what) : Error(ErrorKind::kCompute, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string &what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace heraldsim

#endif  // HERALDSIM_ERROR_HPP
