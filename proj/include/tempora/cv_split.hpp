/* Copyright 2026 The Tempora Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

	http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
--------------------------------------------------------------------------------------------------------------*/

#pragma once

#include "tempora/panel.hpp"

#include <string>
#include <vector>

namespace tempora {

struct EraRange {
    EraId first;
    EraId last;

    bool contains(EraId e) const noexcept { return !(e < first) && !(last < e); }
    friend bool operator==(const EraRange&, const EraRange&) = default;
};

// Train / gap / validation / gap / test over whole eras. Gap eras are dropped.
struct GroupedSplitSpec {
    std::string name;
    EraRange train;
    int gap1 = 0;
    EraRange validation;
    int gap2 = 0;
    EraRange test;

    // Throws ConfigError on empty, reversed, overlapping or under-gapped ranges.
    void validate() const;

    friend bool operator==(const GroupedSplitSpec&, const GroupedSplitSpec&) = default;
};

struct SplitPanels {
    PanelSet train;
    PanelSet validation;
    PanelSet test;
};

// The test range is clamped to the panel's last era; the other ranges must lie inside the panel span.
SplitPanels make_split(const PanelSet& panel, const GroupedSplitSpec& spec);

// Walk-forward CV-1, CV-2, CV-3. Training always starts at era 1 and tests run to era 1030.
std::vector<GroupedSplitSpec> walk_forward_presets();

// Looks up "cv1" / "cv2" / "cv3" (case-insensitive, optional dash).
GroupedSplitSpec preset_by_name(const std::string& name);

} // namespace tempora
