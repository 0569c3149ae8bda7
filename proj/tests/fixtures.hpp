#pragma once

#include <string>

#include "csid/ldag.hpp"

// Graph sources shared across the test binaries. These mirror the files in
// graphs/ but are embedded so tests do not depend on the working directory.
namespace fixtures {

inline const char* switch_confounder_src() {
  return R"(node A
node X
node Y
latent L
A -> X
A -> Y
X -> Y [A=1, L=*]
L -> X [A=0]
L -> Y
)";
}

inline const char* gated_backdoor_src() {
  return R"(node W
node X
node Y
latent Z
W -> X
X -> Y
Z -> X [W=1]
Z -> Y
)";
}

inline const char* label_severed_src() {
  return R"(node X
node Z
node Y
latent A
latent H
X -> Z [A=0]
Z -> Y [A=1, H=*]
A -> Z
A -> Y
H -> X
H -> Y
)";
}

inline const char* context_split_adjustment_src() {
  return R"(node X
node Z
node Y
latent Q
latent H
Q -> Y [X=*, Z=0]
Q -> Z
X -> Y [Z=1, Q=*]
Z -> Y
Z -> X
H -> X
H -> Z
)";
}

inline const char* backfront_mix_src() {
  return R"(node A
node W
node X
node Z
node Y
latent U
W -> X
W -> Y [A=0, Z=*, X=*, U=*]
X -> Y [A=0, Z=*, U=*, W=*]
X -> Z [A=1]
Z -> Y
A -> Y
A -> Z
U -> X
U -> Y [A=1, Z=*, X=*, W=*]
)";
}

inline const char* context_backdoor_chain_src() {
  return R"(node A
node W
node Z
node X
node Y
latent L
latent M
latent N
W -> Z
Z -> X
X -> Y
A -> W
A -> Z
L -> X
L -> W [A=0, M=*]
M -> W
M -> Y
N -> Z
N -> Y
)";
}

inline const char* backdoor_src() {
  return R"(node A
node X
node Y
A -> X
A -> Y
X -> Y
)";
}

inline const char* frontdoor_src() {
  return R"(node X
node Z
node Y
latent U
X -> Z
Z -> Y
U -> X
U -> Y
)";
}

inline const char* bow_src() {
  return R"(node X
node Y
latent U
X -> Y
U -> X
U -> Y
)";
}

inline csid::Ldag switch_confounder() { return csid::parse_ldag(switch_confounder_src()); }
inline csid::Ldag gated_backdoor() { return csid::parse_ldag(gated_backdoor_src()); }
inline csid::Ldag label_severed() { return csid::parse_ldag(label_severed_src()); }
inline csid::Ldag context_split_adjustment() {
  return csid::parse_ldag(context_split_adjustment_src());
}
inline csid::Ldag backfront_mix() { return csid::parse_ldag(backfront_mix_src()); }
inline csid::Ldag context_backdoor_chain() {
  return csid::parse_ldag(context_backdoor_chain_src());
}
inline csid::Ldag backdoor() { return csid::parse_ldag(backdoor_src()); }
inline csid::Ldag frontdoor() { return csid::parse_ldag(frontdoor_src()); }
inline csid::Ldag bow() { return csid::parse_ldag(bow_src()); }

}  // namespace fixtures
