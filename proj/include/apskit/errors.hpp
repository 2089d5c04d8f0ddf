// Copyright 2026 The apskit Authors
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

namespace apskit {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, double last_defect)
      : Error(what), last_defect_(last_defect) {}
  double last_defect() const { return last_defect_; }

 private:
  double last_defect_;
};

class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class NotHermitianError : public Error {
 public:
  NotHermitianError(const std::string& what, double time, double asymmetry)
      : Error(what), time_(time), asymmetry_(asymmetry) {}
  double time() const { return time_; }
  double asymmetry() const { return asymmetry_; }

 private:
  double time_;
  double asymmetry_;
};

class IllPosedHorizonError : public Error {
 public:
  using Error::Error;
};

class TraceDriftError : public Error {
 public:
  TraceDriftError(const std::string& what, double drift)
      : Error(what), drift_(drift) {}
  double drift() const { return drift_; }

 private:
  double drift_;
};

}  // namespace apskit
