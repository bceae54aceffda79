/* Copyright 2026 The Score Following Game Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef SFG_CORE_ERROR_HPP_
#define SFG_CORE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sfg {

// Base for every error raised by the library. The CLI maps these onto exit
// codes: IoError and UsageError exit with 2, everything else with 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or preconditions (bad spec, inconsistent shapes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ShapeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A NaN or infinity showed up where training cannot continue.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current state (stepping a finished episode,
// reusing a consumed tape).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace sfg

#endif  // SFG_CORE_ERROR_HPP_
