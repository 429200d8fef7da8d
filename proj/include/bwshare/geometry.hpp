#pragma once

#include <cmath>

namespace bwshare {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(const Point& a, const Point& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Rect {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

    bool contains(const Point& p) const
    {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

} // namespace bwshare
