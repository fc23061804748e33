// Copyright 2026 The sqzw Authors
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

#include <stdexcept>
#include <string>

namespace sqzw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes that disagree with an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A 1x1 channel-mixing matrix that is singular or too close to it.
class InvertibilityError : public Error {
 public:
  using Error::Error;
};

// Malformed container files: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed container whose contents do not match the expected tensor schema.
class SchemaError : public FormatError {
 public:
  using FormatError::FormatError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class AudioFormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqzw
