/* Copyright 2026 The AnyProp Authors. All Rights Reserved.

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

#include "anyprop/tensor.h"

namespace anyprop {

std::string ToString(const Dims& dims) {
  return std::to_string(dims.height) + "x" + std::to_string(dims.width);
}

const char* ToString(ChannelSemantics semantics) {
  switch (semantics) {
    case ChannelSemantics::kIntensity:
      return "intensity";
    case ChannelSemantics::kClassProb:
      return "class-prob";
    case ChannelSemantics::kGeneric:
      return "generic";
  }
  return "unknown";
}

FeatureMap::FeatureMap(int channels, Dims dims, ChannelSemantics semantics,
                       TimeUs timestamp)
    : channels_(channels),
      dims_(dims),
      semantics_(semantics),
      timestamp_(timestamp),
      data_(static_cast<std::size_t>(channels) * dims.area(), 0.0) {}

}  // namespace anyprop
