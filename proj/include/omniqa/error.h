// Copyright 2026 The omniqa Authors
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

#ifndef OMNIQA_ERROR_H_
#define OMNIQA_ERROR_H_

#include <stdexcept>
#include <string>

namespace omniqa {

// Every failure raised by the toolkit derives from Error. The subclasses
// map one-to-one onto the command-line exit codes: UsageError -> 1,
// everything data related -> 2, ClientError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Bad input data: malformed files, degenerate statistics, shape mismatches.
class DataError : public Error {
 public:
  using Error::Error;
};

class RangeError : public DataError {
 public:
  using DataError::DataError;
};

class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

class CoverageError : public DataError {
 public:
  using DataError::DataError;
};

// The external inpainting client failed or broke the job-directory protocol.
class ClientError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public ClientError {
 public:
  using ClientError::ClientError;
};

}  // namespace omniqa

#endif  // OMNIQA_ERROR_H_
