pub mod geometry {
    pub mod shapes {
        #[derive(Clone, Debug)]
        pub struct Rect {
            pub w: u32,
            pub h: u32,
        }

        impl Rect {
            pub fn new(w: u32, h: u32) -> Self {
                Rect { w, h }
            }

            pub fn area(&self) -> u32 {
                self.w * self.h
            }

            pub fn width(&self) -> u32 {
                self.w
            }

            pub fn set_width(&mut self, w: u32) {
                self.w = w;
            }

            pub fn sides(&self) -> u32 {
                4
            }

            pub fn reset(&mut self) {}

            #[deprecated]
            pub fn perimeter_old(&self) -> u32 {
                2 * (self.w + self.h)
            }

            pub fn describe(&self) -> String {
                format!("{}x{}", self.w, self.h)
            }

            pub fn scale(&mut self, k: u32) {
                self.w *= k;
                self.h *= k;
            }
        }

        impl PartialEq for Rect {
            fn eq(&self, other: &Rect) -> bool {
                self.w == other.w && self.h == other.h
            }
        }
    }
}
