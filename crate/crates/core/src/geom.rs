//! Small 3-vector helpers used by the mobility and kinematics code.

/// A point or direction in meters (users live on the z = 0 plane).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Horizontal (xy-plane) speed.
    pub fn norm_xy(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Rescales so the norm does not exceed `max`; zero vectors pass through.
    pub fn clamp_norm(self, max: f64) -> Vec3 {
        let n = self.norm();
        if n > max && n > 0.0 {
            self.scale(max / n)
        } else {
            self
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_norm_scales_down_only() {
        let v = Vec3::new(3.0, 4.0, 0.0);
        assert_eq!(v.clamp_norm(10.0), v);
        let c = v.clamp_norm(2.5);
        assert!((c.norm() - 2.5).abs() < 1e-12);
        // Direction preserved.
        assert!((c.x / c.y - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_clamp_is_identity() {
        assert_eq!(Vec3::ZERO.clamp_norm(1.0), Vec3::ZERO);
    }
}
