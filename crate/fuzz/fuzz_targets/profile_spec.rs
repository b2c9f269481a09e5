#![no_main]

use libfuzzer_sys::fuzz_target;
use semispectral::kernels::{kernel_eval, ConvolutionKernel, IntervalSet, KernelProfile};

fuzz_target!(|bytes: &[u8]| {
    let Ok(text) = std::str::from_utf8(bytes) else {
        return;
    };
    if let Ok(p) = KernelProfile::parse(text, None) {
        let k = ConvolutionKernel::new(p);
        let v = kernel_eval(&k, &IntervalSet::real_line(), 0.25);
        assert!((0.0..=1.0).contains(&v));
    }
});
