#pragma once

// Case tables for surface polygonization of a sampled implicit function.
// kEdgeTable maps an 8-bit cube occupancy index to the set of intersected
// edges; kTriTable lists, for the same index, up to five triangles as
// triples of edge ids terminated by -1.
namespace csf::mc {

extern const int kEdgeTable[256];
extern const int kTriTable[256][16];

}  // namespace csf::mc
