//
// Copyright 2026 The sqlforge Authors
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
//

#ifndef SQLFORGE_ERROR_H_
#define SQLFORGE_ERROR_H_

#include <stdexcept>
#include <string>

namespace sqlforge {

// Base of every data/validation error raised by the library. The CLI maps
// these to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Position-carrying error for the ASDL and SQL front ends. Line and column are
// 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(std::string kind, const std::string& message, int line,
              int column)
      : Error(std::move(kind), message + " at " + std::to_string(line) + ":" +
                                   std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace sqlforge

#endif  // SQLFORGE_ERROR_H_
