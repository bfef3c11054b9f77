#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sigmabilap {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Local polar frame of a reentrant corner: theta = 0 along ref_dir, theta
// increasing counterclockwise (orientation +1) or clockwise (-1), theta = alpha
// on the second edge.
struct CornerFrame {
    Point vertex;
    double alpha = 0.0;
    Point ref_dir{1.0, 0.0};
    int orientation = 1;
};

struct PolarCoord {
    double r = 0.0;
    double theta = 0.0;  // in [0, 2 pi)
};

PolarCoord corner_polar(const CornerFrame& c, Point p);

enum class NodeKind : std::uint8_t { Outside, Boundary, Interior };

// Nodewise values over all (nx + 1)(ny + 1) grid nodes, index i + (nx + 1) j.
using NodeField = Eigen::VectorXd;

class Grid2D {
public:
    // nx * ny cells of side h with lower-left corner (x0, y0); cell_inside is
    // indexed ci + nx cj.
    Grid2D(double x0, double y0, double h, int nx, int ny, std::vector<std::uint8_t> mask);

    static Grid2D rectangle(int nx, int ny, double x0 = 0.0, double x1 = 1.0, double y0 = 0.0,
                            double y1 = 1.0);
    // (-1,1)^2 minus [0,1) x (-1,0], n cells per side, corner registered.
    static Grid2D lshape(int n);
    // (-1,1)^2 minus [0,1] x [w,1] and [0,1] x [-1,-w]; reentrant corners at
    // (0, w) and (0, -w), mirror images across y = 0.
    static Grid2D notched(int n, double w = 0.25);

    // Validates the frame against the mask; throws FrameError.
    void add_corner(const CornerFrame& c);
    void clear_corners() { corners_.clear(); }

    double h() const { return h_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double x0() const { return x0_; }
    double y0() const { return y0_; }
    int num_nodes() const { return (nx_ + 1) * (ny_ + 1); }
    int node_index(int i, int j) const { return i + (nx_ + 1) * j; }
    Point node(int k) const;
    NodeKind kind(int k) const { return kind_[k]; }
    bool cell_inside(int ci, int cj) const;
    int unknown(int k) const { return unknown_[k]; }
    int num_unknowns() const { return static_cast<int>(interior_.size()); }
    const std::vector<int>& interior_nodes() const { return interior_; }
    const std::vector<CornerFrame>& corners() const { return corners_; }

    NodeField zeros() const { return NodeField::Zero(num_nodes()); }
    // f evaluated at interior nodes, zero elsewhere.
    NodeField interpolate(const std::function<double(double, double)>& f) const;
    // Interior nodes form one 4-connected component.
    bool interior_connected() const;

private:
    double x0_, y0_, h_;
    int nx_, ny_;
    std::vector<std::uint8_t> cell_inside_;
    std::vector<NodeKind> kind_;
    std::vector<int> unknown_;
    std::vector<int> interior_;
    std::vector<CornerFrame> corners_;
};

// key=value domain description: domain=rectangle|lshape|notched, nx=, ny=,
// optional x0,x1,y0,y1 (rectangle), w (notched), and repeated
// corner=x,y,dx,dy,orientation declarations replacing the defaults.
std::multimap<std::string, std::string> parse_key_values(std::istream& in);
Grid2D build_domain(const std::multimap<std::string, std::string>& kv);

class SigmaField {
public:
    SigmaField() = default;
    explicit SigmaField(std::vector<double> cells) : cells_(std::move(cells)) {}

    static SigmaField constant(const Grid2D& g, double value);
    // f evaluated at cell centres.
    static SigmaField from_function(const Grid2D& g, const std::function<double(double, double)>& f);

    // Throws PreconditionViolation unless |sigma| >= sigma_min on inside cells.
    void validate(const Grid2D& g, double sigma_min = 1e-12) const;

    // Mean of 1/sigma over the cells around each interior node.
    NodeField inverse_at_nodes(const Grid2D& g) const;

    const std::vector<double>& cells() const { return cells_; }
    double cell(int ci, int cj, int nx) const { return cells_[ci + nx * cj]; }

private:
    std::vector<double> cells_;
};

// Whitespace or comma separated cell values, ny rows of nx values, bottom row first.
SigmaField read_sigma_file(std::istream& in, const Grid2D& g);

}  // namespace sigmabilap
