# sys_map_page -- page mapping
def sys_map_page(old, pt, index, frame, perm):
    pfn = z3.UDiv(old.pages_ptr_to_int, z3.BitVecVal(dt.PAGE_SIZE, 64)) + frame
    cond = z3.And(
        z3.ULT(pt, dt.NPAGE),
        z3.ULT(frame, dt.NPAGE),
        z3.ULT(index, dt.PAGE_WORDS),
        old.pages[pt].type == dt.page_type.PAGE_TYPE_X86_PT,
        old.pages[pt].owner == old.current,
        old.pages[frame].owner == old.current,
        old.pages[frame].type == dt.page_type.PAGE_TYPE_FRAME,
        old.pages[pt].data(index) == 0,
    )
    new = old.copy()
    new.pages[pt].data[index] = (pfn << dt.PTE_ADDR_SHIFT) | perm
    new.pages[frame].refcnt += 1
    return cond, util.If(cond, new, old)
