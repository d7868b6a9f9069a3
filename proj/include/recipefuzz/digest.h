// Copyright 2026 The recipefuzz Authors
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

#ifndef RECIPEFUZZ_DIGEST_H_
#define RECIPEFUZZ_DIGEST_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace recipefuzz {

// Lowercase hex SHA-256 (64 characters).
std::string Sha256Hex(std::span<const uint8_t> bytes);
std::string Sha256Hex(std::string_view text);

}  // namespace recipefuzz

#endif  // RECIPEFUZZ_DIGEST_H_
