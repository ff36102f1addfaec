use std::alloc::{self, Layout};
use std::fmt;
use std::ptr::NonNull;

use smallvec::SmallVec;

use crate::error::{LayoutError, Result};

/// Contiguous, byte-addressable storage backing part of a view.
pub trait Blob: Send + Sync {
    fn bytes(&self) -> &[u8];

    fn bytes_mut(&mut self) -> &mut [u8];

    fn len(&self) -> usize {
        self.bytes().len()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Blob for Vec<u8> {
    fn bytes(&self) -> &[u8] {
        self
    }

    fn bytes_mut(&mut self) -> &mut [u8] {
        self
    }
}

impl Blob for Box<[u8]> {
    fn bytes(&self) -> &[u8] {
        self
    }

    fn bytes_mut(&mut self) -> &mut [u8] {
        self
    }
}

impl Blob for &mut [u8] {
    fn bytes(&self) -> &[u8] {
        self
    }

    fn bytes_mut(&mut self) -> &mut [u8] {
        self
    }
}

/// Zero-initialized heap memory with a caller-chosen start alignment.
pub struct AlignedBlob {
    ptr: NonNull<u8>,
    len: usize,
    align: usize,
}

// SAFETY: AlignedBlob uniquely owns its allocation, like Vec<u8>.
unsafe impl Send for AlignedBlob {}
// SAFETY: shared access only hands out `&[u8]`.
unsafe impl Sync for AlignedBlob {}

impl AlignedBlob {
    pub fn zeroed(len: usize, align: usize) -> Result<Self> {
        let layout = Layout::from_size_align(len, align)
            .map_err(|_| LayoutError::Alloc { size: len, align })?;
        let ptr = if len == 0 {
            // A dangling but well-aligned pointer is valid for zero-length slices.
            NonNull::new(align as *mut u8).expect("alignment is non-zero")
        } else {
            // SAFETY: layout has non-zero size.
            NonNull::new(unsafe { alloc::alloc_zeroed(layout) })
                .ok_or(LayoutError::Alloc { size: len, align })?
        };
        Ok(Self { ptr, len, align })
    }

    pub fn align(&self) -> usize {
        self.align
    }
}

impl Blob for AlignedBlob {
    fn bytes(&self) -> &[u8] {
        // SAFETY: ptr is valid for len initialized bytes for the lifetime of self.
        unsafe { std::slice::from_raw_parts(self.ptr.as_ptr(), self.len) }
    }

    fn bytes_mut(&mut self) -> &mut [u8] {
        // SAFETY: as above, and &mut self guarantees exclusivity.
        unsafe { std::slice::from_raw_parts_mut(self.ptr.as_ptr(), self.len) }
    }
}

impl Clone for AlignedBlob {
    fn clone(&self) -> Self {
        let mut copy = Self::zeroed(self.len, self.align).expect("allocation failed");
        copy.bytes_mut().copy_from_slice(self.bytes());
        copy
    }
}

impl Drop for AlignedBlob {
    fn drop(&mut self) {
        if self.len > 0 {
            // SAFETY: allocated in `zeroed` with exactly this layout.
            unsafe {
                alloc::dealloc(
                    self.ptr.as_ptr(),
                    Layout::from_size_align_unchecked(self.len, self.align),
                )
            }
        }
    }
}

impl fmt::Debug for AlignedBlob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlignedBlob")
            .field("len", &self.len)
            .field("align", &self.align)
            .finish()
    }
}

/// Small blob stored inline (spilling to the heap past 64 bytes).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InlineBlob(pub SmallVec<[u8; 64]>);

impl InlineBlob {
    pub fn zeroed(len: usize) -> Self {
        Self(SmallVec::from_elem(0, len))
    }
}

impl Blob for InlineBlob {
    fn bytes(&self) -> &[u8] {
        &self.0
    }

    fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }
}

/// Produces blobs for a view: called once per blob with the requested
/// start alignment and size.
pub trait BlobAllocator {
    type Blob: Blob;

    fn allocate(&self, align: usize, size: usize) -> Result<Self::Blob>;
}

impl<B: Blob, F: Fn(usize, usize) -> Result<B>> BlobAllocator for F {
    type Blob = B;

    fn allocate(&self, align: usize, size: usize) -> Result<B> {
        self(align, size)
    }
}

/// Zero-filled [`AlignedBlob`]s.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlignedAllocator;

impl BlobAllocator for AlignedAllocator {
    type Blob = AlignedBlob;

    fn allocate(&self, align: usize, size: usize) -> Result<AlignedBlob> {
        AlignedBlob::zeroed(size, align)
    }
}

/// Zero-filled `Vec<u8>` blobs. Vec storage only guarantees byte alignment.
#[derive(Debug, Clone, Copy, Default)]
pub struct VecAllocator;

impl BlobAllocator for VecAllocator {
    type Blob = Vec<u8>;

    fn allocate(&self, _align: usize, size: usize) -> Result<Vec<u8>> {
        Ok(vec![0; size])
    }
}
